#pragma once

// Manifest-driven ingestion of labeled datasets into Records.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "instructkit/types.hpp"

namespace instructkit {

/// Label emitted for predictions nothing could be extracted from. Manifests
/// may not use it as a label, so it never equals a gold label.
inline constexpr std::string_view kUnparseableLabel = "__unparseable__";

struct CorpusManifest {
  std::string version;
  std::uint64_t default_seed = 0;
  std::vector<DatasetMeta> datasets;

  /// Throws Error(UnknownColumn) naming the id when absent.
  const DatasetMeta& find(std::string_view id) const;
};

/// Reads and validates a manifest. Relative source and label-map paths are
/// resolved against the manifest's directory.
///
/// Errors: MissingFile, ParseError (with line), DuplicateDatasetId,
/// InvalidLabelSpace, MetricTaskMismatch.
CorpusManifest load_manifest(const std::filesystem::path& path);
CorpusManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir);

/// Checks every DatasetMeta invariant; throws on the first violation.
void validate(const DatasetMeta& meta);

/// Reads a "surface<TAB>canonical" table; '#' starts a comment line.
std::map<std::string, std::vector<std::string>> load_label_map_file(const std::filesystem::path& path);

struct IngestionReport {
  std::string dataset_id;
  std::size_t rows_in = 0;
  std::size_t records_out = 0;
  std::size_t dropped_empty_text = 0;
  std::size_t dropped_conflicting_labels = 0;
  std::vector<std::string> warnings;

  std::size_t dropped() const { return dropped_empty_text + dropped_conflicting_labels; }
};

struct IngestResult {
  std::vector<Record> records;
  IngestionReport report;
};

/// One Record per usable source row, in source order. Ordinals are row
/// positions across the dataset's sources (train, dev, test, then all), so
/// dropped rows leave gaps but ids stay stable.
///
/// Empty-text rows and single-label rows carrying several distinct labels
/// are dropped and counted. A label that is neither in the label space nor
/// a declared surface variant (after case-folding) throws LabelOutsideSpace.
IngestResult ingest_dataset(const DatasetMeta& meta);

/// Ingests every dataset, in parallel across datasets.
std::vector<IngestResult> ingest_all(const CorpusManifest& manifest);

}  // namespace instructkit
