#pragma once

// Cleaning and splitting: dedup -> unify labels -> length filter -> split.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "instructkit/types.hpp"

namespace instructkit {

struct SplitRatios {
  double train = 0.7;
  double test = 0.2;
  double dev = 0.1;

  /// Throws Error(InvalidRatios) unless each part is >= 0 and they sum to 1.
  void validate() const;
};

/// Surface variants mapped onto canonical labels, matched case-insensitively.
class LabelMap {
 public:
  LabelMap() = default;
  /// Throws Error(InvalidLabelSpace) if a canonical is outside the space or a
  /// surface maps to two canonicals.
  LabelMap(std::vector<std::string> label_space, const std::map<std::string, std::vector<std::string>>& variants);

  static LabelMap for_dataset(const DatasetMeta& meta) { return LabelMap(meta.label_space, meta.label_variants); }

  /// Canonical label for a surface form, if it is canonical already or mapped.
  std::optional<std::string> resolve(std::string_view surface) const;

 private:
  std::vector<std::string> space_;
  std::map<std::string, std::string> surface_to_canonical_;
};

struct Filtered {
  std::vector<Record> records;
  std::size_t removed = 0;
};

/// Drops exact raw-text repeats, keeping the first occurrence. Labels are
/// ignored, so conflicting duplicates also collapse to the first.
Filtered deduplicate(std::vector<Record> records);

/// Rewrites every label to its canonical lowercase form, then re-sorts and
/// de-duplicates each label set. Throws Error(UnmappableLabel).
std::vector<Record> unify_labels(std::vector<Record> records, const LabelMap& label_map);

/// Removes records with fewer than `min_letters` Unicode letters (L*).
Filtered filter_short(std::vector<Record> records, std::size_t min_letters = 3);

struct SplitResult {
  std::vector<Record> train;
  std::vector<Record> test;
  std::vector<Record> dev;
};

/// Per-stratum largest-remainder allocation over (train, test, dev) with a
/// seeded Fisher-Yates choosing members. Each output keeps input order.
/// Throws Error(EmptyInput) on no records.
SplitResult stratified_split(std::vector<Record> records, const SplitRatios& ratios, std::uint64_t seed,
                             std::string_view dataset_id);

/// Moves a stratified `dev_fraction` of a presplit train set into dev.
/// Returns {train, dev}.
std::pair<std::vector<Record>, std::vector<Record>> derive_dev_from_train(std::vector<Record> train,
                                                                          double dev_fraction,
                                                                          std::uint64_t seed,
                                                                          std::string_view dataset_id);

struct PreprocessOptions {
  SplitRatios ratios;
  double dev_fraction = 0.3;
  std::size_t min_letters = 3;
  std::uint64_t seed = 0;
};

struct PreprocessReport {
  std::string dataset_id;
  std::size_t input = 0;
  std::size_t removed_duplicates = 0;
  std::size_t removed_short = 0;
  bool dev_derived = false;
  std::map<std::string, std::map<std::string, std::size_t>> histograms;  // split -> stratum -> count

  nlohmann::json to_json() const;
};

struct PreprocessResult {
  std::vector<Record> records;  // every record carries its final split
  PreprocessReport report;
};

/// The full cleaning pipeline for one dataset, in its fixed order.
PreprocessResult preprocess_dataset(const DatasetMeta& meta, std::vector<Record> records,
                                    const PreprocessOptions& options);

}  // namespace instructkit
