#include "instructkit/assemble.hpp"

#include <algorithm>

#include "instructkit/error.hpp"
#include "instructkit/io.hpp"
#include "instructkit/random.hpp"

namespace instructkit {

using io::json;

std::string_view to_string(ShuffleStrategy s) {
  switch (s) {
    case ShuffleStrategy::alphabetical: return "alphabetical";
    case ShuffleStrategy::by_language: return "by_language";
    case ShuffleStrategy::by_task: return "by_task";
    case ShuffleStrategy::full_random: return "full_random";
  }
  return "alphabetical";
}

ShuffleStrategy parse_shuffle_strategy(std::string_view text) {
  if (text == "alphabetical") return ShuffleStrategy::alphabetical;
  if (text == "by_language") return ShuffleStrategy::by_language;
  if (text == "by_task") return ShuffleStrategy::by_task;
  if (text == "full_random") return ShuffleStrategy::full_random;
  throw Error(ErrorKind::ConfigError, "unknown shuffle strategy '" + std::string(text) + "'");
}

std::vector<Record> sample_training(const std::vector<Record>& records, std::size_t cap, std::uint64_t seed,
                                    std::string_view dataset_id) {
  if (records.size() <= cap) return records;

  std::map<std::string, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < records.size(); ++i) strata[stratum_key(records[i])].push_back(i);

  std::vector<std::size_t> sizes;
  for (const auto& [_, members] : strata) sizes.push_back(members.size());
  const auto seats = apportion_counts(cap, sizes);

  std::vector<bool> keep(records.size(), false);
  std::size_t s = 0;
  for (auto& [key, members] : strata) {
    auto rng = make_rng({seed, dataset_id, "cap", fnv1a64(key)});
    fisher_yates(members, rng);
    for (std::size_t k = 0; k < seats[s]; ++k) keep[members[k]] = true;
    ++s;
  }
  std::vector<Record> out;
  out.reserve(cap);
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (keep[i]) out.push_back(records[i]);
  }
  return out;
}

std::vector<InstructionSample> attach_instructions(const std::vector<Record>& records, const InstructionPool& pool,
                                                   const DatasetMeta& meta, std::uint64_t seed) {
  if (pool.instructions.empty()) throw Error(ErrorKind::EmptyPool, meta.id);
  std::vector<InstructionSample> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    auto rng = make_rng({seed, meta.id, "attach", r.ordinal});
    const auto pick = static_cast<std::size_t>(rng.below(pool.instructions.size()));
    InstructionSample s;
    s.dataset_id = meta.id;
    s.record_id = r.record_id;
    s.ordinal = r.ordinal;
    s.system_text = pool.system_role;
    s.user_text = pool.instructions[pick] + "\n" + r.text;
    s.assistant_text = serialize_target(r, meta.task_kind);
    s.language = meta.language;
    s.task = meta.task;
    s.instruction_index = pick;
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

bool alphabetical_less(const InstructionSample& a, const InstructionSample& b) {
  if (a.language != b.language) return a.language < b.language;
  if (a.dataset_id != b.dataset_id) return a.dataset_id < b.dataset_id;
  return a.ordinal < b.ordinal;
}

template <typename Key>
void shuffle_blocks(std::vector<InstructionSample>& items, Key key_of, std::uint64_t seed, std::string_view stage) {
  std::size_t begin = 0;
  while (begin < items.size()) {
    std::size_t end = begin + 1;
    while (end < items.size() && key_of(items[end]) == key_of(items[begin])) ++end;
    auto rng = make_rng({seed, key_of(items[begin]), stage, 0});
    fisher_yates(std::span<InstructionSample>(items.data() + begin, end - begin), rng);
    begin = end;
  }
}

}  // namespace

std::vector<InstructionSample> shuffle(const SamplesByDataset& samples, ShuffleStrategy strategy, std::uint64_t seed,
                                       LanguageShuffleMode language_mode) {
  std::vector<InstructionSample> all;
  for (const auto& [_, list] : samples) all.insert(all.end(), list.begin(), list.end());
  std::sort(all.begin(), all.end(), alphabetical_less);

  switch (strategy) {
    case ShuffleStrategy::alphabetical:
      break;
    case ShuffleStrategy::by_language:
      if (language_mode == LanguageShuffleMode::samples) {
        shuffle_blocks(all, [](const InstructionSample& s) { return s.language.tag(); }, seed, "shuffle-language");
      } else {
        // Permute whole datasets within each language; samples stay contiguous.
        std::map<Language, std::vector<std::string>> datasets_by_language;
        for (const auto& [id, list] : samples) {
          if (!list.empty()) datasets_by_language[list.front().language].push_back(id);
        }
        std::vector<InstructionSample> out;
        out.reserve(all.size());
        for (auto& [lang, ids] : datasets_by_language) {
          auto rng = make_rng({seed, lang.tag(), "shuffle-language-datasets", 0});
          fisher_yates(ids, rng);
          for (const auto& id : ids) {
            auto block = samples.at(id);
            std::sort(block.begin(), block.end(), alphabetical_less);
            out.insert(out.end(), block.begin(), block.end());
          }
        }
        all = std::move(out);
      }
      break;
    case ShuffleStrategy::by_task:
      std::stable_sort(all.begin(), all.end(),
                       [](const InstructionSample& a, const InstructionSample& b) { return a.task < b.task; });
      shuffle_blocks(all, [](const InstructionSample& s) { return s.task; }, seed, "shuffle-task");
      break;
    case ShuffleStrategy::full_random: {
      auto rng = make_rng({seed, "", "shuffle-full", 0});
      fisher_yates(all, rng);
      break;
    }
  }
  return all;
}

json ExportManifest::to_json() const {
  json per_dataset = json::object();
  for (const auto& [id, c] : counts) per_dataset[id] = {{"before_cap", c.first}, {"after_cap", c.second}};
  return {{"output", output_path}, {"strategy", to_string(strategy)}, {"seed", seed},
          {"datasets", per_dataset}, {"total", total},              {"sha256", sha256}};
}

json sample_to_json(const InstructionSample& s) {
  return {{"messages", json::array({{{"role", "system"}, {"content", s.system_text}},
                                    {{"role", "user"}, {"content", s.user_text}},
                                    {{"role", "assistant"}, {"content", s.assistant_text}}})},
          {"dataset_id", s.dataset_id},
          {"record_id", s.record_id},
          {"ordinal", s.ordinal},
          {"task", s.task},
          {"language", s.language.tag()},
          {"instruction_index", s.instruction_index}};
}

InstructionSample sample_from_json(const json& j) {
  InstructionSample s;
  const auto& messages = j.at("messages");
  if (!messages.is_array() || messages.size() != 3) throw Error(ErrorKind::ParseError, "expected three messages");
  s.system_text = messages[0].at("content").get<std::string>();
  s.user_text = messages[1].at("content").get<std::string>();
  s.assistant_text = messages[2].at("content").get<std::string>();
  s.dataset_id = j.at("dataset_id").get<std::string>();
  s.record_id = j.at("record_id").get<std::string>();
  s.ordinal = j.value("ordinal", std::size_t{0});
  s.task = j.at("task").get<std::string>();
  s.language = Language::parse(j.at("language").get<std::string>());
  s.instruction_index = j.value("instruction_index", std::size_t{0});
  return s;
}

ExportManifest export_training(const std::vector<InstructionSample>& samples, const std::filesystem::path& path,
                               ShuffleStrategy strategy, std::uint64_t seed) {
  std::string contents;
  for (const auto& s : samples) contents += io::dump_line(sample_to_json(s));
  io::write_file(path, contents);

  ExportManifest m;
  m.output_path = path.string();
  m.strategy = strategy;
  m.seed = seed;
  m.total = samples.size();
  m.sha256 = io::sha256_hex(contents);
  return m;
}

std::vector<InstructionSample> read_training_file(const std::filesystem::path& path) {
  std::vector<InstructionSample> out;
  io::for_each_jsonl(io::read_file(path), [&](std::size_t line, const json& j) {
    try {
      out.push_back(sample_from_json(j));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::ParseError, path.string() + " line " + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

std::vector<EvalPrompt> build_eval_prompts(const std::vector<Record>& test_records, const InstructionPool& pool,
                                           const DatasetMeta& meta) {
  if (pool.instructions.empty()) throw Error(ErrorKind::EmptyPool, meta.id);
  std::vector<EvalPrompt> out;
  out.reserve(test_records.size());
  for (const auto& r : test_records) {
    out.push_back({r.record_id, meta.id, pool.system_role, pool.instructions.front() + "\n" + r.text,
                   serialize_target(r, meta.task_kind)});
  }
  return out;
}

json eval_prompt_to_json(const EvalPrompt& p) {
  return {{"record_id", p.record_id},
          {"dataset_id", p.dataset_id},
          {"messages", json::array({{{"role", "system"}, {"content", p.system_text}},
                                    {{"role", "user"}, {"content", p.user_text}}})},
          {"gold", p.gold}};
}

EvalPrompt eval_prompt_from_json(const json& j) {
  EvalPrompt p;
  p.record_id = j.at("record_id").get<std::string>();
  p.dataset_id = j.at("dataset_id").get<std::string>();
  const auto& messages = j.at("messages");
  p.system_text = messages.at(0).at("content").get<std::string>();
  p.user_text = messages.at(1).at("content").get<std::string>();
  p.gold = j.at("gold").get<std::string>();
  return p;
}

}  // namespace instructkit
