#include "instructkit/types.hpp"

#include <algorithm>

#include "instructkit/error.hpp"
#include "instructkit/unicode.hpp"

namespace instructkit {

Language Language::parse(std::string_view text) {
  const std::string t = unicode::fold(text);
  if (t == "arabic") return Language(Kind::arabic);
  if (t == "english") return Language(Kind::english);
  if (t == "hindi") return Language(Kind::hindi);
  if (t.empty()) throw Error(ErrorKind::ParseError, "empty language");
  return other(t);
}

std::string Language::tag() const {
  switch (kind_) {
    case Kind::arabic: return "arabic";
    case Kind::english: return "english";
    case Kind::hindi: return "hindi";
    case Kind::other: return tag_;
  }
  return tag_;
}

std::string Language::display_name() const {
  std::string name = tag();
  if (!name.empty() && name[0] >= 'a' && name[0] <= 'z') name[0] = static_cast<char>(name[0] - 'a' + 'A');
  return name;
}

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::single_label: return "single_label";
    case TaskKind::multi_label: return "multi_label";
    case TaskKind::summarization: return "summarization";
  }
  return "single_label";
}

TaskKind parse_task_kind(std::string_view text) {
  if (text == "single_label") return TaskKind::single_label;
  if (text == "multi_label") return TaskKind::multi_label;
  if (text == "summarization") return TaskKind::summarization;
  throw Error(ErrorKind::ParseError, "unknown task_kind '" + std::string(text) + "'");
}

MetricKind MetricKind::parse(std::string_view text) {
  MetricKind m;
  const std::string_view prefix = "f1_positive";
  if (text == "accuracy") {
    m.kind = Kind::accuracy;
  } else if (text == "micro_f1") {
    m.kind = Kind::micro_f1;
  } else if (text == "macro_f1") {
    m.kind = Kind::macro_f1;
  } else if (text == "weighted_f1") {
    m.kind = Kind::weighted_f1;
  } else if (text == "rouge2") {
    m.kind = Kind::rouge2;
  } else if (text.starts_with(prefix)) {
    m.kind = Kind::f1_positive;
    if (text.size() > prefix.size() + 1 && text[prefix.size()] == ':') {
      m.positive_label = std::string(text.substr(prefix.size() + 1));
    }
  } else {
    throw Error(ErrorKind::ParseError, "unknown metric '" + std::string(text) + "'");
  }
  return m;
}

std::string MetricKind::to_string() const {
  switch (kind) {
    case Kind::accuracy: return "accuracy";
    case Kind::micro_f1: return "micro_f1";
    case Kind::macro_f1: return "macro_f1";
    case Kind::weighted_f1: return "weighted_f1";
    case Kind::f1_positive: return positive_label.empty() ? "f1_positive" : "f1_positive:" + positive_label;
    case Kind::rouge2: return "rouge2";
  }
  return "accuracy";
}

std::string MetricKind::short_name() const {
  switch (kind) {
    case Kind::accuracy: return "Acc";
    case Kind::micro_f1: return "Mi-F1";
    case Kind::macro_f1: return "Ma-F1";
    case Kind::weighted_f1: return "W-F1";
    case Kind::f1_positive: return "F1_Pos";
    case Kind::rouge2: return "R-2";
  }
  return "Acc";
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::dev: return "dev";
    case Split::test: return "test";
    case Split::unassigned: return "unassigned";
  }
  return "unassigned";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::train;
  if (text == "dev") return Split::dev;
  if (text == "test") return Split::test;
  if (text == "unassigned" || text == "all") return Split::unassigned;
  throw Error(ErrorKind::ParseError, "unknown split '" + std::string(text) + "'");
}

std::string make_record_id(std::string_view dataset_id, std::size_t ordinal) {
  return std::string(dataset_id) + ":" + std::to_string(ordinal);
}

std::string stratum_key(const Record& record) {
  std::string key;
  for (std::size_t i = 0; i < record.labels.size(); ++i) {
    if (i) key.push_back('\x1f');
    key += record.labels[i];
  }
  return key;
}

std::string serialize_target(const Record& record, TaskKind kind) {
  if (kind == TaskKind::summarization) return record.reference;
  LabelSet labels = record.labels;
  std::sort(labels.begin(), labels.end());
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) out += ", ";
    out += labels[i];
  }
  return out;
}

}  // namespace instructkit
