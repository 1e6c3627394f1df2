#pragma once

// Label recovery from free-form generations: normalization, code-switch
// transliteration, and whole-token label matching.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "instructkit/types.hpp"

namespace instructkit {

/// Grapheme rewrites from a non-Latin script to lowercase ASCII. Rules are
/// tried longest source first at each position.
class TransliterationMap {
 public:
  struct Rule {
    std::u32string source;
    std::string replacement;
  };

  TransliterationMap() = default;
  /// Throws Error(InvariantViolation) for an empty or Latin source, or a
  /// replacement that is not lowercase ASCII letters.
  void add(std::string_view source, std::string_view replacement);

  /// Rewrites non-Latin letters covered by a rule; everything else is kept.
  std::string apply(std::string_view utf8) const;

  const std::vector<Rule>& rules() const noexcept { return rules_; }
  bool empty() const noexcept { return rules_.empty(); }

  /// Built-in Arabic to phonetic Latin table (mirrors data/translit_arabic.tsv).
  static const TransliterationMap& arabic_default();
  /// "source<TAB>replacement" lines, '#' comments. Throws MissingFile/ParseError.
  static TransliterationMap load(const std::filesystem::path& path);

 private:
  std::vector<Rule> rules_;  // sorted by source length, longest first
};

/// Lowercases, turns anything but letters, digits, whitespace, '-' and '_'
/// into spaces, collapses whitespace, then transliterates. Idempotent.
std::string normalize_output(std::string_view text,
                             const TransliterationMap& map = TransliterationMap::arabic_default());

struct ExtractionResult {
  enum class Status { matched, unparseable };
  enum class Rule { exact, pattern, transliterated, fuzzy_none };

  Status status = Status::unparseable;
  LabelSet labels;  // sorted; empty when unparseable
  std::string normalized_text;
  Rule rule_fired = Rule::fuzzy_none;
};

std::string_view to_string(ExtractionResult::Rule rule);

/// Finds labels as whole-token sequences in the normalized text. Competing
/// matches resolve by longer label, then earlier position, then label-space
/// order; overlapped shorter matches are discarded. Single-label tasks keep
/// the winner, multi-label tasks keep every surviving label.
ExtractionResult extract_label(std::string_view text, const std::vector<std::string>& label_space,
                               TaskKind kind = TaskKind::single_label,
                               const TransliterationMap& map = TransliterationMap::arabic_default());

/// A prediction ready for scoring. Unparseable classification outputs carry
/// the reserved sentinel label, so they count as wrong.
struct ScoredPair {
  LabelSet predicted;
  LabelSet gold;
  std::string predicted_text;  // summarization: raw generation
  std::string gold_text;       // summarization: reference
  bool unparseable = false;
};

ScoredPair score_input(std::string_view prediction_text, const LabelSet& gold, const DatasetMeta& meta,
                       const TransliterationMap& map = TransliterationMap::arabic_default());
ScoredPair score_input(std::string_view prediction_text, std::string_view gold_summary, const DatasetMeta& meta);

/// Splits a serialized target (", "-joined) back into a label set.
LabelSet parse_gold(std::string_view serialized, TaskKind kind);

}  // namespace instructkit
