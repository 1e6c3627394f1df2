#pragma once

// Per-dataset scoring: accuracy, F1 variants and ROUGE-2.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "instructkit/postprocess.hpp"
#include "instructkit/types.hpp"

namespace instructkit {

struct ClassCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t support = 0;  // gold items carrying the class
};

/// Per-class counts over paired label sets. Works for single- and
/// multi-label data; a class is any label seen in either side.
class ConfusionCounts {
 public:
  ConfusionCounts(const std::vector<LabelSet>& preds, const std::vector<LabelSet>& golds);

  const std::map<std::string, ClassCounts>& classes() const noexcept { return classes_; }
  std::size_t items() const noexcept { return items_; }
  std::size_t exact_matches() const noexcept { return exact_; }

  /// F1 of one class, 0 when precision and recall are both undefined.
  double f1(const std::string& label) const;

 private:
  std::map<std::string, ClassCounts> classes_;
  std::size_t items_ = 0;
  std::size_t exact_ = 0;
};

/// F1 from raw counts with 0/0 defined as 0.
double f1_from_counts(std::size_t tp, std::size_t fp, std::size_t fn);

/// Macro averages over classes present in the golds; weighted uses gold
/// support; micro pools counts over every class (including the unparseable
/// sentinel). Accuracy is exact set match.
///
/// Errors: LengthMismatch, EmptyInput, UnknownPositiveLabel (when the
/// positive label is neither in `label_space` nor, without one, in the data).
double classification_metric(const MetricKind& kind, const std::vector<LabelSet>& preds,
                             const std::vector<LabelSet>& golds,
                             const std::vector<std::string>& label_space = {});

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t overlap = 0;
  std::size_t candidate_bigrams = 0;
  std::size_t reference_bigrams = 0;
};

/// Lowercase, non-alphanumerics (marks kept) to spaces, whitespace split.
std::vector<std::string> rouge_tokenize(std::string_view text);

/// Clipped bigram overlap; any zero denominator yields a zero component.
RougeScore rouge2(std::string_view candidate, std::string_view reference);

struct EvalOutcome {
  std::string dataset_id;
  MetricKind metric;
  double score = 0.0;
  std::size_t pairs = 0;
  std::size_t unparseable = 0;
  std::size_t missing_predictions = 0;
  std::string prediction_file;

  nlohmann::json to_json() const;
  static EvalOutcome from_json(const nlohmann::json& j);
};

/// Applies the dataset's metric to its scored pairs. For rouge2 the score is
/// the mean per-example F1. Errors: EmptyInput, MetricTaskMismatch.
EvalOutcome evaluate_dataset(const std::vector<ScoredPair>& pairs, const DatasetMeta& meta);

}  // namespace instructkit
