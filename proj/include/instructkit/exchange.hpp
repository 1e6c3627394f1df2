#pragma once

// Line-delimited files shared between stages and with the external trainer:
// stage records, evaluation prompts, predictions, and trainer settings.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "instructkit/assemble.hpp"
#include "instructkit/types.hpp"

namespace instructkit {

inline constexpr std::string_view kEvalPromptsFormat = "instructkit-eval-prompts";
inline constexpr std::string_view kPredictionsFormat = "instructkit-predictions";
inline constexpr int kExchangeVersion = 1;

nlohmann::json record_to_json(const Record& record);
Record record_from_json(const nlohmann::json& j);
void write_records(const std::filesystem::path& path, const std::vector<Record>& records);
std::vector<Record> read_records(const std::filesystem::path& path);

/// A header line {"format", "version", "count"} followed by one prompt per line.
void write_eval_prompts(const std::filesystem::path& path, const std::vector<EvalPrompt>& prompts);
std::vector<EvalPrompt> read_eval_prompts(const std::filesystem::path& path);

struct Prediction {
  std::string record_id;
  std::string text;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// Header line as for prompts, then {"record_id", "prediction"} per line.
/// The header is optional on read. Duplicate record ids are a ParseError.
void write_predictions(const std::filesystem::path& path, const std::vector<Prediction>& predictions);
std::vector<Prediction> read_predictions(const std::filesystem::path& path);

/// Fine-tuning settings handed to the external trainer with the training file.
struct TrainerSettings {
  std::string preset;
  std::string base_model = "meta-llama/Llama-3.1-8B-Instruct";
  int rank = 128;
  int alpha = 128;
  double learning_rate = 2e-4;
  std::string optimizer = "adamw";
  int batch_size = 16;
  int epochs = 2;
  std::string precision = "bf16";

  /// "reference-full", "reference-quantized" or "tiny". Throws ConfigError otherwise.
  static TrainerSettings preset_named(std::string_view name);
  nlohmann::json to_json() const;
};

}  // namespace instructkit
