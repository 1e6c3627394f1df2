#include "instructkit/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "instructkit/error.hpp"
#include "instructkit/random.hpp"
#include "instructkit/unicode.hpp"

namespace instructkit {

void SplitRatios::validate() const {
  if (train < 0.0 || test < 0.0 || dev < 0.0) throw Error(ErrorKind::InvalidRatios, "ratios must be non-negative");
  if (std::abs(train + test + dev - 1.0) > 1e-9) throw Error(ErrorKind::InvalidRatios, "ratios must sum to 1");
}

LabelMap::LabelMap(std::vector<std::string> label_space, const std::map<std::string, std::vector<std::string>>& variants)
    : space_(std::move(label_space)) {
  std::sort(space_.begin(), space_.end());
  for (const auto& [canonical, surfaces] : variants) {
    if (!std::binary_search(space_.begin(), space_.end(), canonical)) {
      throw Error(ErrorKind::InvalidLabelSpace, "label map targets unknown label '" + canonical + "'");
    }
    for (const auto& s : surfaces) {
      const auto [it, inserted] = surface_to_canonical_.emplace(unicode::fold(s), canonical);
      if (!inserted && it->second != canonical) {
        throw Error(ErrorKind::InvalidLabelSpace, "surface '" + s + "' maps to both '" + it->second + "' and '" + canonical + "'");
      }
    }
  }
}

std::optional<std::string> LabelMap::resolve(std::string_view surface) const {
  std::string folded = unicode::fold(surface);
  if (std::binary_search(space_.begin(), space_.end(), folded)) return folded;
  if (const auto it = surface_to_canonical_.find(folded); it != surface_to_canonical_.end()) return it->second;
  return std::nullopt;
}

Filtered deduplicate(std::vector<Record> records) {
  Filtered out;
  std::unordered_set<std::string> seen;
  for (auto& r : records) {
    if (seen.insert(r.text).second) {
      out.records.push_back(std::move(r));
    } else {
      ++out.removed;
    }
  }
  return out;
}

std::vector<Record> unify_labels(std::vector<Record> records, const LabelMap& label_map) {
  for (auto& r : records) {
    for (auto& label : r.labels) {
      auto canonical = label_map.resolve(label);
      if (!canonical) throw Error(ErrorKind::UnmappableLabel, r.record_id + ": '" + label + "'");
      label = std::move(*canonical);
    }
    std::sort(r.labels.begin(), r.labels.end());
    r.labels.erase(std::unique(r.labels.begin(), r.labels.end()), r.labels.end());
  }
  return records;
}

Filtered filter_short(std::vector<Record> records, std::size_t min_letters) {
  Filtered out;
  for (auto& r : records) {
    if (unicode::count_letters(r.text) >= min_letters) {
      out.records.push_back(std::move(r));
    } else {
      ++out.removed;
    }
  }
  return out;
}

namespace {

/// Groups input positions by stratum; strata come back in key order.
std::map<std::string, std::vector<std::size_t>> strata_of(const std::vector<Record>& records) {
  std::map<std::string, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < records.size(); ++i) strata[stratum_key(records[i])].push_back(i);
  return strata;
}

/// Assigns every input position a part index, stratum by stratum.
std::vector<std::size_t> assign_parts(const std::vector<Record>& records, std::span<const double> weights,
                                      std::uint64_t seed, std::string_view dataset_id, std::string_view stage) {
  std::vector<std::size_t> part(records.size(), 0);
  for (auto& [key, members] : strata_of(records)) {
    const auto counts = apportion(members.size(), weights);
    auto rng = make_rng({seed, dataset_id, stage, fnv1a64(key)});
    fisher_yates(members, rng);
    std::size_t cursor = 0;
    for (std::size_t p = 0; p < counts.size(); ++p) {
      for (std::size_t k = 0; k < counts[p]; ++k) part[members[cursor++]] = p;
    }
  }
  return part;
}

}  // namespace

SplitResult stratified_split(std::vector<Record> records, const SplitRatios& ratios, std::uint64_t seed,
                             std::string_view dataset_id) {
  ratios.validate();
  if (records.empty()) throw Error(ErrorKind::EmptyInput, std::string(dataset_id) + ": nothing to split");
  for (const auto& r : records) {
    if (r.split != Split::unassigned) {
      throw Error(ErrorKind::InvariantViolation, r.record_id + " already carries a split");
    }
  }
  const double weights[] = {ratios.train, ratios.test, ratios.dev};
  const auto part = assign_parts(records, weights, seed, dataset_id, "split");

  SplitResult out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    Record& r = records[i];
    switch (part[i]) {
      case 0: r.split = Split::train; out.train.push_back(std::move(r)); break;
      case 1: r.split = Split::test; out.test.push_back(std::move(r)); break;
      default: r.split = Split::dev; out.dev.push_back(std::move(r)); break;
    }
  }
  return out;
}

std::pair<std::vector<Record>, std::vector<Record>> derive_dev_from_train(std::vector<Record> train,
                                                                          double dev_fraction,
                                                                          std::uint64_t seed,
                                                                          std::string_view dataset_id) {
  if (dev_fraction < 0.0 || dev_fraction > 1.0) throw Error(ErrorKind::InvalidRatios, "dev fraction must lie in [0, 1]");
  if (train.empty()) throw Error(ErrorKind::EmptyInput, std::string(dataset_id) + ": empty train split");
  const double weights[] = {1.0 - dev_fraction, dev_fraction};
  const auto part = assign_parts(train, weights, seed, dataset_id, "dev-from-train");

  std::pair<std::vector<Record>, std::vector<Record>> out;
  for (std::size_t i = 0; i < train.size(); ++i) {
    Record& r = train[i];
    if (part[i] == 0) {
      r.split = Split::train;
      out.first.push_back(std::move(r));
    } else {
      r.split = Split::dev;
      out.second.push_back(std::move(r));
    }
  }
  return out;
}

nlohmann::json PreprocessReport::to_json() const {
  return {{"dataset_id", dataset_id},
          {"input", input},
          {"removed_duplicates", removed_duplicates},
          {"removed_short", removed_short},
          {"dev_derived", dev_derived},
          {"histograms", histograms}};
}

PreprocessResult preprocess_dataset(const DatasetMeta& meta, std::vector<Record> records,
                                    const PreprocessOptions& options) {
  PreprocessResult result;
  PreprocessReport& report = result.report;
  report.dataset_id = meta.id;
  report.input = records.size();

  Filtered deduped = deduplicate(std::move(records));
  report.removed_duplicates = deduped.removed;
  std::vector<Record> unified = meta.task_kind == TaskKind::summarization
                                    ? std::move(deduped.records)
                                    : unify_labels(std::move(deduped.records), LabelMap::for_dataset(meta));
  Filtered kept = filter_short(std::move(unified), options.min_letters);
  report.removed_short = kept.removed;

  std::vector<Record>& out = result.records;
  if (!meta.presplit) {
    if (kept.records.empty()) throw Error(ErrorKind::EmptyInput, meta.id + ": no records left after cleaning");
    SplitResult split = stratified_split(std::move(kept.records), options.ratios, options.seed, meta.id);
    for (auto* part : {&split.train, &split.test, &split.dev}) std::move(part->begin(), part->end(), std::back_inserter(out));
  } else {
    std::vector<Record> train;
    bool has_dev = false;
    for (auto& r : kept.records) {
      has_dev = has_dev || r.split == Split::dev;
      if (r.split == Split::train) {
        train.push_back(std::move(r));
      } else {
        out.push_back(std::move(r));
      }
    }
    if (!has_dev && options.dev_fraction > 0.0 && !train.empty()) {
      auto [t, d] = derive_dev_from_train(std::move(train), options.dev_fraction, options.seed, meta.id);
      report.dev_derived = true;
      std::move(t.begin(), t.end(), std::back_inserter(out));
      std::move(d.begin(), d.end(), std::back_inserter(out));
    } else {
      std::move(train.begin(), train.end(), std::back_inserter(out));
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Record& a, const Record& b) { return a.ordinal < b.ordinal; });

  for (const auto& r : out) {
    std::string key = meta.task_kind == TaskKind::summarization ? std::string("(summary)") : serialize_target(r, meta.task_kind);
    ++report.histograms[std::string(to_string(r.split))][key];
  }
  return result;
}

}  // namespace instructkit
