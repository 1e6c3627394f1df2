#include "instructkit/exchange.hpp"

#include <set>

#include "instructkit/error.hpp"
#include "instructkit/io.hpp"

namespace instructkit {

using io::json;

json record_to_json(const Record& r) {
  json j = {{"record_id", r.record_id}, {"ordinal", r.ordinal}, {"text", r.text}, {"split", to_string(r.split)}};
  if (!r.labels.empty()) j["labels"] = r.labels;
  if (!r.reference.empty()) j["reference"] = r.reference;
  return j;
}

Record record_from_json(const json& j) {
  Record r;
  r.record_id = j.at("record_id").get<std::string>();
  r.ordinal = j.at("ordinal").get<std::size_t>();
  r.text = j.at("text").get<std::string>();
  r.split = parse_split(j.value("split", std::string("all")));
  if (j.contains("labels")) r.labels = j.at("labels").get<LabelSet>();
  r.reference = j.value("reference", std::string());
  return r;
}

namespace {

template <typename T, typename Fn>
std::vector<T> read_lines(const std::filesystem::path& path, Fn&& convert) {
  std::vector<T> out;
  io::for_each_jsonl(io::read_file(path), [&](std::size_t line, const json& j) {
    try {
      convert(line, j, out);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::ParseError, path.string() + " line " + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

json header(std::string_view format, std::size_t count) {
  return {{"format", format}, {"version", kExchangeVersion}, {"count", count}};
}

void check_header(const std::filesystem::path& path, const json& j, std::string_view format) {
  if (j.at("format").get<std::string>() != format) {
    throw Error(ErrorKind::ParseError, path.string() + ": expected format " + std::string(format));
  }
  if (j.value("version", 0) != kExchangeVersion) {
    throw Error(ErrorKind::ParseError, path.string() + ": unsupported version");
  }
}

}  // namespace

void write_records(const std::filesystem::path& path, const std::vector<Record>& records) {
  std::string out;
  for (const auto& r : records) out += io::dump_line(record_to_json(r));
  io::write_file(path, out);
}

std::vector<Record> read_records(const std::filesystem::path& path) {
  return read_lines<Record>(path, [](std::size_t, const json& j, std::vector<Record>& out) {
    out.push_back(record_from_json(j));
  });
}

void write_eval_prompts(const std::filesystem::path& path, const std::vector<EvalPrompt>& prompts) {
  std::string out = io::dump_line(header(kEvalPromptsFormat, prompts.size()));
  for (const auto& p : prompts) out += io::dump_line(eval_prompt_to_json(p));
  io::write_file(path, out);
}

std::vector<EvalPrompt> read_eval_prompts(const std::filesystem::path& path) {
  return read_lines<EvalPrompt>(path, [&](std::size_t, const json& j, std::vector<EvalPrompt>& out) {
    if (j.contains("format")) {
      check_header(path, j, kEvalPromptsFormat);
      return;
    }
    out.push_back(eval_prompt_from_json(j));
  });
}

void write_predictions(const std::filesystem::path& path, const std::vector<Prediction>& predictions) {
  std::string out = io::dump_line(header(kPredictionsFormat, predictions.size()));
  for (const auto& p : predictions) out += io::dump_line({{"record_id", p.record_id}, {"prediction", p.text}});
  io::write_file(path, out);
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  std::set<std::string> seen;
  return read_lines<Prediction>(path, [&](std::size_t line, const json& j, std::vector<Prediction>& out) {
    if (j.contains("format")) {
      check_header(path, j, kPredictionsFormat);
      return;
    }
    Prediction p{j.at("record_id").get<std::string>(), j.at("prediction").get<std::string>()};
    if (!seen.insert(p.record_id).second) {
      throw Error(ErrorKind::ParseError, path.string() + " line " + std::to_string(line) + ": duplicate record_id " + p.record_id);
    }
    out.push_back(std::move(p));
  });
}

TrainerSettings TrainerSettings::preset_named(std::string_view name) {
  TrainerSettings s;
  s.preset = std::string(name);
  if (name == "reference-full") return s;
  if (name == "reference-quantized") {
    s.rank = 16;
    s.alpha = 16;
    s.precision = "int4_weights_bf16_compute";
    return s;
  }
  if (name == "tiny") {
    s.base_model = "sshleifer/tiny-gpt2";
    s.rank = 8;
    s.alpha = 8;
    s.batch_size = 8;
    s.precision = "fp32";
    return s;
  }
  throw Error(ErrorKind::ConfigError, "unknown trainer preset '" + std::string(name) + "'");
}

json TrainerSettings::to_json() const {
  return {{"preset", preset},       {"base_model", base_model}, {"rank", rank},
          {"alpha", alpha},         {"learning_rate", learning_rate}, {"optimizer", optimizer},
          {"batch_size", batch_size}, {"epochs", epochs},         {"precision", precision}};
}

}  // namespace instructkit
