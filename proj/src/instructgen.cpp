#include "instructkit/instructgen.hpp"

#include <httplib.h>

#include <cctype>
#include <cstdlib>
#include <set>
#include <thread>

#include "instructkit/error.hpp"
#include "instructkit/io.hpp"
#include "instructkit/unicode.hpp"

namespace instructkit {

using io::json;

std::string_view to_string(InstructLanguage lang) {
  return lang == InstructLanguage::english ? "english" : "native";
}

InstructLanguage parse_instruct_language(std::string_view text) {
  if (text == "english") return InstructLanguage::english;
  if (text == "native") return InstructLanguage::native;
  throw Error(ErrorKind::ParseError, "unknown instruction language '" + std::string(text) + "'");
}

GenerationPrompt build_generation_prompt(const DatasetMeta& meta, InstructLanguage lang, std::size_t n) {
  if (unicode::trim(meta.task_definition).empty()) throw Error(ErrorKind::MissingTaskDefinition, meta.id);

  const std::string data_lang = meta.language.display_name();
  const std::string instruct_lang = lang == InstructLanguage::english ? std::string("English") : data_lang;
  std::string definition = unicode::trim(meta.task_definition);
  while (!definition.empty() && definition.back() == '.') definition.pop_back();
  const char* article = std::string_view("AEIOU").find(data_lang.front()) != std::string_view::npos ? "an" : "a";

  std::string user = "We are creating an " + instruct_lang + " instruction-following dataset for " + article + " " +
                     data_lang + " dataset called: " + meta.name + " covering the task of " + meta.task +
                     ". The user defined the task as follows: " + definition + ".";
  if (meta.task_kind != TaskKind::summarization) {
    user += " For that task, the labels include: ";
    for (std::size_t i = 0; i < meta.label_space.size(); ++i) {
      if (i) user += ", ";
      user += meta.label_space[i];
    }
    user += ".";
  }
  user += " Write " + std::to_string(n) + " very diverse and concise " + instruct_lang +
          " instructions. Return the instructions as strings in a list format as follows [].";

  return {std::string(kGeneratorSystemPrompt), std::move(user), lang};
}

BackendConfig BackendConfig::from_json(const json& j) {
  BackendConfig c;
  c.name = j.value("name", std::string());
  c.endpoint = j.at("endpoint").get<std::string>();
  c.model = j.at("model").get<std::string>();
  c.credential_env = j.value("credential_env", std::string());
  c.timeout = std::chrono::milliseconds(j.value("timeout_ms", 60000));
  c.max_retries = j.value("max_retries", 3);
  c.backoff = std::chrono::milliseconds(j.value("backoff_ms", 500));
  if (c.name.empty()) c.name = c.model;
  return c;
}

namespace {

/// Reads quoted strings (either quote style, backslash escapes) between the
/// first '[' and its closing ']'.
std::vector<std::string> parse_bracketed(std::string_view s) {
  std::vector<std::string> out;
  const auto open = s.find('[');
  if (open == std::string_view::npos) return {};
  std::size_t i = open + 1;
  while (i < s.size()) {
    const char c = s[i];
    if (c == ']') return out;
    if (c == '"' || c == '\'') {
      const char quote = c;
      std::string item;
      ++i;
      bool closed = false;
      while (i < s.size()) {
        const char d = s[i++];
        if (d == '\\' && i < s.size()) {
          const char e = s[i++];
          switch (e) {
            case 'n': item.push_back('\n'); break;
            case 't': item.push_back('\t'); break;
            default: item.push_back(e); break;
          }
        } else if (d == quote) {
          closed = true;
          break;
        } else {
          item.push_back(d);
        }
      }
      if (!closed) return {};
      out.push_back(unicode::trim(item));
      continue;
    }
    if (c == ',' || c == ' ' || c == '\n' || c == '\r' || c == '\t') {
      ++i;
      continue;
    }
    return {};  // bare tokens: not a string list
  }
  return {};
}

std::string strip_line_decoration(std::string line) {
  line = unicode::trim(line);
  std::size_t i = 0;
  if (!line.empty() && (line[0] == '-' || line[0] == '*')) {
    i = 1;
  } else {
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
      ++i;
    } else {
      i = 0;
    }
  }
  line = unicode::trim(std::string_view(line).substr(i));
  if (!line.empty() && line.back() == ',') line.pop_back();
  if (line.size() >= 2 && (line.front() == '"' || line.front() == '\'') && line.back() == line.front()) {
    line = line.substr(1, line.size() - 2);
  }
  return unicode::trim(line);
}

std::vector<std::string> parse_lines(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t nl = s.find('\n', pos);
    if (nl == std::string_view::npos) nl = s.size();
    const std::string line = unicode::trim(s.substr(pos, nl - pos));
    pos = nl + 1;
    if (line.empty() || line.starts_with("```") || line == "[" || line == "]") continue;
    std::string item = strip_line_decoration(line);
    if (!item.empty()) out.push_back(std::move(item));
  }
  return out;
}

std::string extract_content(const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) return body;
  if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
    const auto& choice = j["choices"][0];
    if (choice.contains("message") && choice["message"].contains("content")) {
      return choice["message"]["content"].get<std::string>();
    }
    if (choice.contains("text")) return choice["text"].get<std::string>();
  }
  if (j.contains("content") && j["content"].is_array()) {
    std::string text;
    for (const auto& part : j["content"]) {
      if (part.contains("text")) text += part["text"].get<std::string>();
    }
    return text;
  }
  if (j.is_array()) return body;
  return {};
}

struct Endpoint {
  std::string scheme_host_port;
  std::string path;
};

Endpoint split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorKind::ConfigError, "endpoint must be a URL: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::vector<std::string> parse_instruction_list(std::string_view content, std::size_t n) {
  if (auto items = parse_bracketed(content); items.size() == n) return items;
  if (auto items = parse_lines(content); items.size() == n) return items;
  return {};
}

std::vector<std::string> request_instructions(const BackendConfig& backend, const GenerationPrompt& prompt,
                                              std::size_t n, CallReport* report) {
  CallReport local;
  CallReport& rep = report ? *report : local;
  rep = {};

  httplib::Headers headers;
  if (!backend.credential_env.empty()) {
    const char* key = std::getenv(backend.credential_env.c_str());
    if (!key || !*key) throw Error(ErrorKind::AuthError, "environment variable " + backend.credential_env + " is not set");
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  const json body = {{"model", backend.model},
                     {"temperature", 1.0},
                     {"messages",
                      json::array({{{"role", "system"}, {"content", prompt.system_text}},
                                   {{"role", "user"}, {"content", prompt.user_text}}})}};
  const std::string payload = body.dump();
  const Endpoint ep = split_url(backend.endpoint);

  ErrorKind failure = ErrorKind::TransportError;
  for (int attempt = 0; attempt <= backend.max_retries; ++attempt) {
    if (attempt > 0) {
      ++rep.retries;
      std::this_thread::sleep_for(backend.backoff * (1LL << (attempt - 1)));
    }
    ++rep.attempts;

    httplib::Client client(ep.scheme_host_port);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(backend.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(backend.timeout - secs);
    client.set_connection_timeout(static_cast<time_t>(secs.count()), static_cast<time_t>(usecs.count()));
    client.set_read_timeout(static_cast<time_t>(secs.count()), static_cast<time_t>(usecs.count()));

    const auto res = client.Post(ep.path, headers, payload, "application/json");
    if (!res) {
      failure = ErrorKind::TransportError;
      rep.last_error = httplib::to_string(res.error());
      continue;
    }
    rep.last_status = res->status;
    if (res->status == 401 || res->status == 403) {
      throw Error(ErrorKind::AuthError, backend.name + ": HTTP " + std::to_string(res->status));
    }
    if (res->status == 429 || res->status >= 500) {
      failure = ErrorKind::TransportError;
      rep.last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw Error(ErrorKind::TransportError, backend.name + ": HTTP " + std::to_string(res->status));
    }
    auto items = parse_instruction_list(extract_content(res->body), n);
    if (items.size() == n) return items;
    failure = ErrorKind::MalformedResponse;
    rep.last_error = "expected " + std::to_string(n) + " instructions";
  }
  throw Error(failure, backend.name + ": " + rep.last_error + " after " + std::to_string(rep.attempts) + " attempts");
}

std::string_view suffix_for(TaskKind kind) {
  return kind == TaskKind::summarization ? kSummarySuffix : kLabelSuffix;
}

std::string with_suffix(std::string_view instruction, TaskKind kind) {
  std::string text = unicode::trim(instruction);
  const std::string_view suffix = suffix_for(kind);
  if (text.ends_with(suffix)) return text;
  if (!text.empty()) text.push_back(' ');
  text += suffix;
  return text;
}

InstructionPool build_pool(const DatasetMeta& meta, const std::vector<std::string>& generator_a,
                           const std::vector<std::string>& generator_b, std::string system_role,
                           InstructLanguage lang, std::pair<std::string, std::string> tags, std::size_t expected) {
  if (generator_a.empty() || generator_b.empty()) throw Error(ErrorKind::EmptyGeneration, meta.id);

  InstructionPool pool;
  pool.dataset_id = meta.id;
  pool.instruct_language = lang;
  pool.task_kind = meta.task_kind;
  pool.system_role = system_role.empty() ? std::string(kDefaultSystemRole) : std::move(system_role);

  std::set<std::string> seen;
  auto add = [&](const std::vector<std::string>& items, const std::string& tag) {
    for (const auto& raw : items) {
      std::string text = with_suffix(raw, meta.task_kind);
      if (!seen.insert(unicode::collapse_whitespace(text)).second) continue;
      pool.instructions.push_back(std::move(text));
      pool.backend_tags.push_back(tag);
    }
  };
  add(generator_a, tags.first);
  add(generator_b, tags.second);
  pool.short_pool = pool.instructions.size() < expected;
  return pool;
}

json pool_to_json(const InstructionPool& pool) {
  json items = json::array();
  for (std::size_t i = 0; i < pool.instructions.size(); ++i) {
    items.push_back({{"text", pool.instructions[i]}, {"backend", pool.backend_tags[i]}});
  }
  return {{"format", "instructkit-pool"},
          {"version", 1},
          {"dataset_id", pool.dataset_id},
          {"instruct_language", to_string(pool.instruct_language)},
          {"task_kind", to_string(pool.task_kind)},
          {"system_role", pool.system_role},
          {"short", pool.short_pool},
          {"instructions", std::move(items)}};
}

InstructionPool pool_from_json(const json& j, std::vector<std::string>* warnings) {
  InstructionPool pool;
  try {
    pool.dataset_id = j.at("dataset_id").get<std::string>();
    pool.instruct_language = parse_instruct_language(j.value("instruct_language", std::string("english")));
    pool.task_kind = parse_task_kind(j.value("task_kind", std::string("single_label")));
    pool.system_role = j.value("system_role", std::string(kDefaultSystemRole));
    pool.short_pool = j.value("short", false);
    for (const auto& item : j.at("instructions")) {
      std::string text = item.is_string() ? item.get<std::string>() : item.at("text").get<std::string>();
      std::string tag = item.is_object() ? item.value("backend", std::string()) : std::string();
      std::string fixed = with_suffix(text, pool.task_kind);
      if (fixed != text && warnings) {
        warnings->push_back(pool.dataset_id + ": instruction " + std::to_string(pool.instructions.size()) + " lacked the suffix");
      }
      pool.instructions.push_back(std::move(fixed));
      pool.backend_tags.push_back(std::move(tag));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("pool: ") + e.what());
  }
  if (pool.instructions.empty()) throw Error(ErrorKind::InvariantViolation, pool.dataset_id + ": empty pool");
  std::set<std::string> seen;
  for (const auto& text : pool.instructions) {
    if (!seen.insert(unicode::collapse_whitespace(text)).second) {
      throw Error(ErrorKind::InvariantViolation, pool.dataset_id + ": duplicate instruction '" + text + "'");
    }
  }
  return pool;
}

void save_pool(const InstructionPool& pool, const std::filesystem::path& path) {
  io::write_file(path, pool_to_json(pool).dump(2) + "\n");
}

InstructionPool load_pool(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  const std::string text = io::read_file(path);
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorKind::ParseError, path.string() + ": not a pool file");
  return pool_from_json(j, warnings);
}

std::string pool_filename(std::string_view dataset_id, InstructLanguage lang) {
  return std::string(dataset_id) + "." + std::string(to_string(lang)) + ".pool.json";
}

}  // namespace instructkit
