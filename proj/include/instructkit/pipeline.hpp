#pragma once

// Stage runner. Every stage reads the outputs of earlier stages from the
// run directory, writes its own subdirectory and records a stage.json with
// input and output checksums; a rerun with unchanged inputs is skipped.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "instructkit/assemble.hpp"
#include "instructkit/corpus.hpp"
#include "instructkit/exchange.hpp"
#include "instructkit/instructgen.hpp"
#include "instructkit/metrics.hpp"
#include "instructkit/preprocess.hpp"
#include "instructkit/report.hpp"

namespace instructkit {

inline constexpr std::string_view kToolVersion = "0.3.0";

enum class Command { ingest, preprocess, geninstruct, assemble, export_, eval, report, stats };

std::string_view to_string(Command command);
Command parse_command(std::string_view text);

struct RunConfig {
  std::filesystem::path manifest;
  std::optional<std::uint64_t> seed;  // falls back to the manifest seed
  std::filesystem::path out_dir = "run";
  bool force = false;

  // preprocess
  SplitRatios ratios;
  double dev_fraction = 0.3;
  std::size_t min_letters = 3;

  // geninstruct
  InstructLanguage instruct_language = InstructLanguage::english;
  std::filesystem::path pools_dir;
  std::filesystem::path backends;
  std::size_t instructions_per_backend = 10;
  std::size_t max_in_flight = 4;
  std::string system_role{kDefaultSystemRole};

  // assemble / export
  std::size_t cap = kDefaultTrainingCap;
  ShuffleStrategy strategy = ShuffleStrategy::alphabetical;
  LanguageShuffleMode language_mode = LanguageShuffleMode::samples;
  std::string trainer_preset = "reference-full";

  // eval
  /// (column name, file) pairs; the column names the score in the report.
  std::vector<std::pair<std::string, std::filesystem::path>> predictions;

  // report
  std::filesystem::path table;  // render an existing result table instead of eval outputs
  std::string delta_column;     // model column compared to sota; empty picks one
  bool average_per_column = false;
  ReportFormat report_format = ReportFormat::markdown;

  // stats
  std::filesystem::path paired_table;
  std::pair<std::string, std::string> stats_columns{"task", "alpha"};

  std::function<void(std::string_view)> log;
};

struct StageResult {
  Command command = Command::ingest;
  bool skipped = false;
  std::filesystem::path stage_dir;
  nlohmann::json summary;
};

/// Runs one stage. Throws Error; MissingPrerequisite when an earlier stage's
/// outputs are absent, ConfigError for unusable options.
StageResult run(Command command, const RunConfig& config);

/// Evaluation core, usable without a run directory.
std::vector<EvalOutcome> evaluate_predictions(const CorpusManifest& manifest, const std::vector<EvalPrompt>& prompts,
                                              const std::vector<Prediction>& predictions,
                                              const std::string& prediction_file,
                                              nlohmann::json* extraction_log = nullptr);

/// Builds the result table of a run: one row per evaluated dataset with the
/// SOTA reference and one column per scored predictions file.
ResultTable results_from_outcomes(const CorpusManifest& manifest,
                                  const std::map<std::string, std::vector<EvalOutcome>>& outcomes_by_column);

}  // namespace instructkit
