#pragma once

// Domain vocabulary shared by every pipeline stage.

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace instructkit {

/// Source language of a dataset. The three named languages order before any
/// `other` tag; `other` tags order by tag text.
class Language {
 public:
  enum class Kind { arabic, english, hindi, other };

  Language() = default;
  explicit Language(Kind kind) : kind_(kind) {}
  static Language other(std::string tag) {
    Language l(Kind::other);
    l.tag_ = std::move(tag);
    return l;
  }
  /// Accepts "arabic", "english", "hindi", anything else becomes other(tag).
  static Language parse(std::string_view text);

  Kind kind() const noexcept { return kind_; }
  /// Lowercase identifier ("arabic", or the other-tag).
  std::string tag() const;
  /// Display name used in prompts ("Arabic").
  std::string display_name() const;

  friend bool operator==(const Language&, const Language&) = default;
  friend std::strong_ordering operator<=>(const Language& a, const Language& b) {
    if (auto c = a.kind_ <=> b.kind_; c != 0) return c;
    return a.tag_ <=> b.tag_;
  }

 private:
  Kind kind_ = Kind::english;
  std::string tag_;
};

enum class TaskKind { single_label, multi_label, summarization };

std::string_view to_string(TaskKind kind);
TaskKind parse_task_kind(std::string_view text);

/// Which score a dataset is judged by.
struct MetricKind {
  enum class Kind { accuracy, micro_f1, macro_f1, weighted_f1, f1_positive, rouge2 };

  Kind kind = Kind::accuracy;
  std::string positive_label;  // only for f1_positive

  static MetricKind parse(std::string_view text);  // "f1_positive:yes" carries the label
  std::string to_string() const;
  /// Short column label in the style of result tables ("W-F1", "R-2").
  std::string short_name() const;

  friend bool operator==(const MetricKind&, const MetricKind&) = default;
};

enum class Split { train, dev, test, unassigned };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

/// Sorted, duplicate-free canonical labels.
using LabelSet = std::vector<std::string>;

/// Where one split of a dataset lives and how to read it.
struct SourceFile {
  std::string path;        // resolved against the manifest directory
  std::string format;      // "csv", "tsv" or "jsonl"
  std::string text_field = "text";
  std::string label_field = "label";  // or the summary field
};

struct DatasetMeta {
  std::string id;
  std::string name;
  Language language;
  std::string task;
  std::string task_definition;
  std::vector<std::string> label_space;
  TaskKind task_kind = TaskKind::single_label;
  MetricKind metric;
  std::optional<double> sota_score;
  bool presplit = false;
  std::string label_delimiter;  // empty: labels are never split
  /// canonical -> surface variants; merged from inline entries and label_map_file.
  std::map<std::string, std::vector<std::string>> label_variants;
  /// split name ("train", "dev", "test", or "all") -> source.
  std::map<std::string, SourceFile> sources;
};

struct Record {
  std::string record_id;  // "<dataset id>:<ordinal>"
  std::size_t ordinal = 0;
  std::string text;
  LabelSet labels;        // classification target
  std::string reference;  // summarization target
  Split split = Split::unassigned;

  friend bool operator==(const Record&, const Record&) = default;
};

std::string make_record_id(std::string_view dataset_id, std::size_t ordinal);

/// Stratum key used by stratified splitting and sampling: the sorted label
/// set joined by U+001F, empty for summarization.
std::string stratum_key(const Record& record);

/// Target serialized as the assistant turn: single label verbatim, multiple
/// labels sorted and joined by ", ", or the reference summary.
std::string serialize_target(const Record& record, TaskKind kind);

}  // namespace instructkit
