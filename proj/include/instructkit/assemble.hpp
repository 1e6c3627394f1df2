#pragma once

// Turning cleaned records into ordered instruction samples: the per-dataset
// training cap, instruction attachment, the four orderings, the chat-format
// training file, and evaluation prompts.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "instructkit/instructgen.hpp"
#include "instructkit/types.hpp"

namespace instructkit {

inline constexpr std::size_t kDefaultTrainingCap = 20000;

struct InstructionSample {
  std::string dataset_id;
  std::string record_id;
  std::size_t ordinal = 0;
  std::string system_text;
  std::string user_text;       // instruction, newline, input text
  std::string assistant_text;  // serialized gold target
  Language language;
  std::string task;
  std::size_t instruction_index = 0;

  friend bool operator==(const InstructionSample&, const InstructionSample&) = default;
};

enum class ShuffleStrategy { alphabetical, by_language, by_task, full_random };

std::string_view to_string(ShuffleStrategy s);
ShuffleStrategy parse_shuffle_strategy(std::string_view text);

/// How by_language randomizes inside each language block: every sample
/// (default), or whole dataset blocks kept contiguous.
enum class LanguageShuffleMode { samples, datasets };

/// Stratified down-sampling of one dataset's train split to `cap` records.
/// Under the cap the input is returned untouched. Output keeps input order.
std::vector<Record> sample_training(const std::vector<Record>& records, std::size_t cap, std::uint64_t seed,
                                    std::string_view dataset_id);

/// One uniformly drawn pool instruction per record; each draw is keyed by
/// (seed, dataset, record ordinal) alone. Throws Error(EmptyPool).
std::vector<InstructionSample> attach_instructions(const std::vector<Record>& records, const InstructionPool& pool,
                                                   const DatasetMeta& meta, std::uint64_t seed);

using SamplesByDataset = std::map<std::string, std::vector<InstructionSample>>;

std::vector<InstructionSample> shuffle(const SamplesByDataset& samples, ShuffleStrategy strategy, std::uint64_t seed,
                                       LanguageShuffleMode language_mode = LanguageShuffleMode::samples);

struct ExportManifest {
  std::string output_path;
  ShuffleStrategy strategy = ShuffleStrategy::alphabetical;
  std::uint64_t seed = 0;
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // dataset -> (before cap, after cap)
  std::size_t total = 0;
  std::string sha256;

  nlohmann::json to_json() const;
};

/// Chat-format line for one sample: a system/user/assistant messages array
/// plus dataset_id, record_id, task and language fields.
nlohmann::json sample_to_json(const InstructionSample& sample);
InstructionSample sample_from_json(const nlohmann::json& j);

/// Writes one sample per line and returns the manifest with the file's
/// SHA-256. Cap counts are left for the caller to fill in. Throws
/// Error(IoError).
ExportManifest export_training(const std::vector<InstructionSample>& samples, const std::filesystem::path& path,
                               ShuffleStrategy strategy, std::uint64_t seed);

std::vector<InstructionSample> read_training_file(const std::filesystem::path& path);

struct EvalPrompt {
  std::string record_id;
  std::string dataset_id;
  std::string system_text;
  std::string user_text;
  std::string gold;

  friend bool operator==(const EvalPrompt&, const EvalPrompt&) = default;
};

/// Pairs each test record with the pool's first instruction; no randomness.
/// Throws Error(EmptyPool).
std::vector<EvalPrompt> build_eval_prompts(const std::vector<Record>& test_records, const InstructionPool& pool,
                                           const DatasetMeta& meta);

nlohmann::json eval_prompt_to_json(const EvalPrompt& prompt);
EvalPrompt eval_prompt_from_json(const nlohmann::json& j);

}  // namespace instructkit
