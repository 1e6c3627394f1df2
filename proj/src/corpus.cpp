#include "instructkit/corpus.hpp"

#include <algorithm>
#include <future>
#include <set>

#include "instructkit/error.hpp"
#include "instructkit/io.hpp"
#include "instructkit/unicode.hpp"

namespace instructkit {

namespace fs = std::filesystem;
using io::json;

const DatasetMeta& CorpusManifest::find(std::string_view id) const {
  for (const auto& d : datasets) {
    if (d.id == id) return d;
  }
  throw Error(ErrorKind::UnknownColumn, "dataset '" + std::string(id) + "' not in manifest");
}

namespace {

std::string require_string(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw Error(ErrorKind::ParseError, where + ": missing string field '" + key + "'");
  }
  return it->get<std::string>();
}

std::string optional_string(const json& obj, const char* key, std::string fallback = {}) {
  const auto it = obj.find(key);
  return (it != obj.end() && it->is_string()) ? it->get<std::string>() : fallback;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

DatasetMeta parse_dataset(const json& j, const fs::path& base, std::size_t index) {
  const std::string where = "datasets[" + std::to_string(index) + "]";
  if (!j.is_object()) throw Error(ErrorKind::ParseError, where + ": expected an object");

  DatasetMeta meta;
  meta.id = require_string(j, "id", where);
  meta.name = optional_string(j, "name", meta.id);
  meta.language = Language::parse(require_string(j, "language", where));
  meta.task = require_string(j, "task", where);
  meta.task_definition = optional_string(j, "task_definition");
  meta.task_kind = parse_task_kind(optional_string(j, "task_kind", "single_label"));
  meta.metric = MetricKind::parse(require_string(j, "metric", where));
  meta.presplit = j.value("presplit", false);
  meta.label_delimiter = optional_string(j, "label_delimiter");

  if (const auto it = j.find("label_space"); it != j.end()) {
    if (!it->is_array()) throw Error(ErrorKind::ParseError, where + ": label_space must be an array");
    for (const auto& l : *it) meta.label_space.push_back(l.get<std::string>());
  }
  if (const auto it = j.find("sota"); it != j.end() && !it->is_null()) {
    if (!it->is_number()) throw Error(ErrorKind::ParseError, where + ": sota must be a number or null");
    meta.sota_score = it->get<double>();
  }
  if (const auto it = j.find("label_map"); it != j.end()) {
    for (const auto& [canonical, variants] : it->items()) {
      auto& dst = meta.label_variants[canonical];
      for (const auto& v : variants) dst.push_back(v.get<std::string>());
    }
  }
  if (const auto it = j.find("label_map_file"); it != j.end()) {
    for (auto& [canonical, variants] : load_label_map_file(resolve(base, it->get<std::string>()))) {
      auto& dst = meta.label_variants[canonical];
      dst.insert(dst.end(), variants.begin(), variants.end());
    }
  }

  const auto sources = j.find("sources");
  if (sources == j.end() || !sources->is_object() || sources->empty()) {
    throw Error(ErrorKind::ParseError, where + ": missing 'sources'");
  }
  for (const auto& [split, src] : sources->items()) {
    SourceFile file;
    file.path = resolve(base, require_string(src, "path", where + ".sources." + split)).string();
    file.format = optional_string(src, "format");
    if (file.format.empty()) {
      const auto ext = fs::path(file.path).extension().string();
      file.format = ext.empty() ? "csv" : ext.substr(1);
    }
    file.text_field = optional_string(src, "text_field", "text");
    file.label_field = optional_string(src, "label_field", meta.task_kind == TaskKind::summarization ? "summary" : "label");
    meta.sources.emplace(split, std::move(file));
  }
  return meta;
}

bool is_canonical_label(const std::string& label) {
  return !label.empty() && label == unicode::fold(label);
}

}  // namespace

void validate(const DatasetMeta& meta) {
  const auto fail = [&](ErrorKind kind, const std::string& why) { throw Error(kind, meta.id + ": " + why); };

  if (meta.id.empty()) throw Error(ErrorKind::ParseError, "dataset id is empty");
  const bool summarization = meta.task_kind == TaskKind::summarization;
  if (summarization != meta.label_space.empty()) {
    fail(ErrorKind::InvalidLabelSpace, summarization ? "summarization datasets take no label space"
                                                     : "label space is empty");
  }
  std::set<std::string> seen;
  for (const auto& label : meta.label_space) {
    if (!is_canonical_label(label)) fail(ErrorKind::InvalidLabelSpace, "label '" + label + "' is not lowercase/trimmed");
    if (label == kUnparseableLabel) fail(ErrorKind::InvalidLabelSpace, "reserved label '" + label + "'");
    if (!seen.insert(label).second) fail(ErrorKind::InvalidLabelSpace, "duplicate label '" + label + "'");
  }

  std::map<std::string, std::string> surface_owner;
  for (const auto& [canonical, variants] : meta.label_variants) {
    if (!seen.contains(canonical)) fail(ErrorKind::InvalidLabelSpace, "label map targets unknown label '" + canonical + "'");
    for (const auto& v : variants) {
      const std::string key = unicode::fold(v);
      const auto [it, inserted] = surface_owner.emplace(key, canonical);
      if (!inserted && it->second != canonical) {
        fail(ErrorKind::InvalidLabelSpace, "surface '" + v + "' maps to both '" + it->second + "' and '" + canonical + "'");
      }
    }
  }

  if ((meta.metric.kind == MetricKind::Kind::rouge2) != summarization) {
    fail(ErrorKind::MetricTaskMismatch, meta.metric.to_string() + " on a " + std::string(to_string(meta.task_kind)) + " dataset");
  }
  if (meta.metric.kind == MetricKind::Kind::f1_positive && !seen.contains(meta.metric.positive_label)) {
    fail(ErrorKind::InvalidLabelSpace, "positive label '" + meta.metric.positive_label + "' not in label space");
  }
  if (meta.sota_score && (*meta.sota_score < 0.0 || *meta.sota_score > 1.0)) {
    fail(ErrorKind::ParseError, "sota must lie in [0, 1]");
  }

  if (meta.presplit) {
    for (const auto& [split, _] : meta.sources) {
      if (split != "train" && split != "dev" && split != "test") fail(ErrorKind::ParseError, "presplit source '" + split + "'");
    }
    if (!meta.sources.contains("train") || !meta.sources.contains("test")) {
      fail(ErrorKind::ParseError, "presplit datasets need train and test sources");
    }
  } else if (meta.sources.size() != 1 || !meta.sources.contains("all")) {
    fail(ErrorKind::ParseError, "datasets that are not presplit take a single 'all' source");
  }
  for (const auto& [split, src] : meta.sources) {
    if (src.format != "csv" && src.format != "tsv" && src.format != "jsonl") {
      fail(ErrorKind::ParseError, "unsupported format '" + src.format + "' for source '" + split + "'");
    }
  }
}

CorpusManifest parse_manifest(std::string_view text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, "line " + std::to_string(io::line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0)) + ": " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::ParseError, "line 1: manifest must be an object");

  CorpusManifest manifest;
  manifest.version = j.value("version", std::string("1"));
  manifest.default_seed = j.value("seed", std::uint64_t{0});

  const auto datasets = j.find("datasets");
  if (datasets == j.end() || !datasets->is_array() || datasets->empty()) {
    throw Error(ErrorKind::ParseError, "manifest lists no datasets");
  }
  std::set<std::string> ids;
  std::set<std::pair<std::string, std::string>> names;
  std::size_t index = 0;
  for (const auto& d : *datasets) {
    DatasetMeta meta;
    try {
      meta = parse_dataset(d, base_dir, index++);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::ParseError, "datasets[" + std::to_string(index - 1) + "]: " + e.what());
    }
    validate(meta);
    if (!ids.insert(meta.id).second) throw Error(ErrorKind::DuplicateDatasetId, meta.id);
    if (!names.emplace(meta.name, meta.language.tag()).second) {
      throw Error(ErrorKind::DuplicateDatasetId, meta.name + " (" + meta.language.tag() + ")");
    }
    manifest.datasets.push_back(std::move(meta));
  }
  return manifest;
}

CorpusManifest load_manifest(const fs::path& path) {
  const std::string text = io::read_file(path);
  return parse_manifest(text, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

std::map<std::string, std::vector<std::string>> load_label_map_file(const fs::path& path) {
  std::map<std::string, std::vector<std::string>> out;
  const std::string text = io::read_file(path);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    const std::string_view line(text.data() + pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    const std::string trimmed = unicode::trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw Error(ErrorKind::ParseError, path.string() + " line " + std::to_string(line_no) + ": expected surface<TAB>canonical");
    }
    out[unicode::trim(line.substr(tab + 1))].push_back(unicode::trim(line.substr(0, tab)));
  }
  return out;
}

namespace {

struct RawRow {
  std::string text;
  std::vector<std::string> labels;  // surfaces, or one summary
};

std::vector<RawRow> read_source(const SourceFile& src) {
  const std::string text = io::read_file(src.path);
  std::vector<RawRow> rows;
  if (src.format == "jsonl") {
    io::for_each_jsonl(text, [&](std::size_t line, const json& obj) {
      const auto t = obj.find(src.text_field);
      const auto l = obj.find(src.label_field);
      if (t == obj.end()) throw Error(ErrorKind::UnknownColumn, src.path + " line " + std::to_string(line) + ": " + src.text_field);
      if (l == obj.end()) throw Error(ErrorKind::UnknownColumn, src.path + " line " + std::to_string(line) + ": " + src.label_field);
      RawRow row;
      row.text = t->is_string() ? t->get<std::string>() : std::string();
      if (l->is_array()) {
        for (const auto& v : *l) row.labels.push_back(v.is_string() ? v.get<std::string>() : v.dump());
      } else if (l->is_string()) {
        row.labels.push_back(l->get<std::string>());
      } else if (!l->is_null()) {
        row.labels.push_back(l->dump());
      }
      rows.push_back(std::move(row));
    });
    return rows;
  }
  const io::Table table = io::parse_delimited(text, src.format == "tsv" ? '\t' : ',');
  const std::size_t text_col = table.column(src.text_field);
  const std::size_t label_col = table.column(src.label_field);
  rows.reserve(table.rows.size());
  for (const auto& r : table.rows) rows.push_back({r[text_col], {r[label_col]}});
  return rows;
}

}  // namespace

IngestResult ingest_dataset(const DatasetMeta& meta) {
  IngestResult result;
  IngestionReport& report = result.report;
  report.dataset_id = meta.id;

  const std::set<std::string> space(meta.label_space.begin(), meta.label_space.end());
  std::set<std::string> admissible = space;
  std::map<std::string, std::string> variant_owner;
  for (const auto& [canonical, variants] : meta.label_variants) {
    for (const auto& v : variants) {
      admissible.insert(unicode::fold(v));
      variant_owner.emplace(unicode::fold(v), canonical);
    }
  }

  static constexpr std::pair<const char*, Split> kOrder[] = {
      {"train", Split::train}, {"dev", Split::dev}, {"test", Split::test}, {"all", Split::unassigned}};

  std::size_t ordinal = 0;
  for (const auto& [split_name, split] : kOrder) {
    const auto src = meta.sources.find(split_name);
    if (src == meta.sources.end()) continue;
    for (RawRow& row : read_source(src->second)) {
      const std::size_t this_ordinal = ordinal++;
      ++report.rows_in;
      const std::string record_id = make_record_id(meta.id, this_ordinal);

      if (unicode::trim(row.text).empty()) {
        ++report.dropped_empty_text;
        report.warnings.push_back(record_id + ": empty text, dropped");
        continue;
      }

      Record record;
      record.record_id = record_id;
      record.ordinal = this_ordinal;
      record.text = std::move(row.text);
      record.split = split;

      if (meta.task_kind == TaskKind::summarization) {
        record.reference = row.labels.empty() ? std::string() : row.labels.front();
        if (unicode::trim(record.reference).empty()) {
          ++report.dropped_empty_text;
          report.warnings.push_back(record_id + ": empty reference summary, dropped");
          continue;
        }
        result.records.push_back(std::move(record));
        continue;
      }

      std::vector<std::string> surfaces;
      for (const auto& field : row.labels) {
        if (meta.label_delimiter.empty()) {
          surfaces.push_back(field);
          continue;
        }
        std::size_t start = 0;
        while (start <= field.size()) {
          std::size_t end = field.find(meta.label_delimiter, start);
          if (end == std::string::npos) end = field.size();
          surfaces.push_back(field.substr(start, end - start));
          start = end + meta.label_delimiter.size();
        }
      }

      LabelSet labels;
      std::set<std::string> resolved;  // canonical targets, for conflict detection
      for (const auto& s : surfaces) {
        const std::string surface = unicode::trim(s);
        if (surface.empty()) continue;
        const std::string folded = unicode::fold(surface);
        if (!admissible.contains(folded)) throw Error(ErrorKind::LabelOutsideSpace, record_id + ": '" + surface + "'");
        resolved.insert(space.contains(folded) ? folded : variant_owner.at(folded));
        labels.push_back(surface);
      }
      if (labels.empty()) throw Error(ErrorKind::LabelOutsideSpace, record_id + ": missing label");
      if (meta.task_kind == TaskKind::single_label && resolved.size() > 1) {
        ++report.dropped_conflicting_labels;
        report.warnings.push_back(record_id + ": conflicting labels for a single-label dataset, dropped");
        continue;
      }
      std::sort(labels.begin(), labels.end());
      labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
      if (meta.task_kind == TaskKind::single_label) labels.resize(1);
      record.labels = std::move(labels);
      result.records.push_back(std::move(record));
    }
  }
  report.records_out = result.records.size();
  return result;
}

std::vector<IngestResult> ingest_all(const CorpusManifest& manifest) {
  std::vector<std::future<IngestResult>> jobs;
  jobs.reserve(manifest.datasets.size());
  for (const auto& meta : manifest.datasets) {
    jobs.push_back(std::async(std::launch::async, [&meta] { return ingest_dataset(meta); }));
  }
  std::vector<IngestResult> out;
  out.reserve(jobs.size());
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

}  // namespace instructkit
