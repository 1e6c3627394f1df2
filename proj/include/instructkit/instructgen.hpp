#pragma once

// Instruction pools: the generation prompt, the chat backend client that asks
// two models for instructions, and the pool file that makes the rest of the
// pipeline work offline.

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "instructkit/types.hpp"

namespace instructkit {

enum class InstructLanguage { english, native };

std::string_view to_string(InstructLanguage lang);
InstructLanguage parse_instruct_language(std::string_view text);

inline constexpr std::string_view kGeneratorSystemPrompt =
    "You are an expert LLM developer with expertise in writing instructions to instruction-tune LLMs for users' tasks.";
inline constexpr std::string_view kDefaultSystemRole =
    "You are a social media expert providing accurate analysis and insights.";
inline constexpr std::string_view kLabelSuffix =
    "Return only the label without any explanation, justification or additional text.";
inline constexpr std::string_view kSummarySuffix =
    "Return only the summary without any explanation, justification or additional text.";

struct GenerationPrompt {
  std::string system_text;
  std::string user_text;
  InstructLanguage instruct_language = InstructLanguage::english;
};

/// Fills the instruction-generation template from dataset metadata. The
/// labels sentence is left out for summarization datasets.
/// Throws Error(MissingTaskDefinition).
GenerationPrompt build_generation_prompt(const DatasetMeta& meta, InstructLanguage lang, std::size_t n = 10);

struct BackendConfig {
  std::string name;            // tag recorded next to each instruction
  std::string endpoint;        // full URL of a chat-completions style endpoint
  std::string model;
  std::string credential_env;  // empty: no Authorization header
  std::chrono::milliseconds timeout{60000};
  int max_retries = 3;
  std::chrono::milliseconds backoff{500};

  static BackendConfig from_json(const nlohmann::json& j);
};

/// Per-call bookkeeping for request_instructions.
struct CallReport {
  int attempts = 0;
  int retries = 0;
  int last_status = 0;
  std::string last_error;
};

/// Extracts exactly `n` instructions from model output. A bracketed string
/// list is tried first, then one instruction per line (fences, bullets and
/// numbering stripped). Returns an empty vector when neither yields `n`.
std::vector<std::string> parse_instruction_list(std::string_view content, std::size_t n);

/// Sends the system+user conversation and parses the reply. Transport
/// failures (connection errors, 429, 5xx) and malformed replies are retried
/// up to `max_retries` times with exponential backoff; 401/403 or a missing
/// credential fail immediately with AuthError.
std::vector<std::string> request_instructions(const BackendConfig& backend, const GenerationPrompt& prompt,
                                              std::size_t n = 10, CallReport* report = nullptr);

struct InstructionPool {
  std::string dataset_id;
  InstructLanguage instruct_language = InstructLanguage::english;
  TaskKind task_kind = TaskKind::single_label;  // picks the suffix wording
  std::string system_role{kDefaultSystemRole};
  std::vector<std::string> instructions;
  std::vector<std::string> backend_tags;  // parallel to instructions
  bool short_pool = false;

  friend bool operator==(const InstructionPool&, const InstructionPool&) = default;
};

std::string_view suffix_for(TaskKind kind);

/// Appends the fixed suffix unless the instruction already ends with it.
std::string with_suffix(std::string_view instruction, TaskKind kind);

/// Concatenates generator A's then generator B's instructions, suffixes
/// them, and drops later duplicates (compared after whitespace collapsing).
/// A pool that ends up below `expected` entries is flagged short.
/// Throws Error(EmptyGeneration) if either generator returned nothing.
InstructionPool build_pool(const DatasetMeta& meta, const std::vector<std::string>& generator_a,
                           const std::vector<std::string>& generator_b, std::string system_role,
                           InstructLanguage lang = InstructLanguage::english,
                           std::pair<std::string, std::string> tags = {"generator_a", "generator_b"},
                           std::size_t expected = 20);

nlohmann::json pool_to_json(const InstructionPool& pool);
/// Applies missing suffixes (reported in `warnings`). Throws
/// Error(InvariantViolation) on an empty pool or duplicate instructions.
InstructionPool pool_from_json(const nlohmann::json& j, std::vector<std::string>* warnings = nullptr);

void save_pool(const InstructionPool& pool, const std::filesystem::path& path);
/// Throws Error(ParseError) for unreadable JSON.
InstructionPool load_pool(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

/// "<dataset id>.<english|native>.pool.json"
std::string pool_filename(std::string_view dataset_id, InstructLanguage lang);

}  // namespace instructkit
