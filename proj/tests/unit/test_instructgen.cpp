#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <set>
#include <thread>

#include <httplib.h>

#include "helpers.hpp"
#include "instructkit/error.hpp"
#include "instructkit/instructgen.hpp"

using namespace instructkit;
using nlohmann::json;

namespace {

std::vector<std::string> numbered(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + " instruction " + std::to_string(i) + ".");
  return out;
}

std::string chat_reply(const std::vector<std::string>& items) {
  return json{{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", json(items).dump()}}}}})}}.dump();
}

/// Local chat endpoint whose reply is chosen per call by `handler`.
class MockServer {
 public:
  explicit MockServer(std::function<void(int call, const httplib::Request&, httplib::Response&)> handler)
      : handler_(std::move(handler)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      handler_(calls_++, req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockServer() {
    server_.stop();
    thread_.join();
  }

  BackendConfig backend() const {
    BackendConfig b;
    b.name = "mock";
    b.endpoint = "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
    b.model = "mock-model";
    b.timeout = std::chrono::milliseconds(5000);
    b.backoff = std::chrono::milliseconds(1);
    return b;
  }
  int calls() const { return calls_; }

 private:
  std::function<void(int, const httplib::Request&, httplib::Response&)> handler_;
  httplib::Server server_;
  std::atomic<int> calls_{0};
  int port_ = 0;
  std::thread thread_;
};

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvariantViolation;
}

}  // namespace

TEST_CASE("generation prompt fills the template") {
  DatasetMeta meta = testing::classification_meta("arsas", {"positive", "negative", "neutral"});
  meta.name = "ArSAS";
  meta.language = Language::parse("arabic");
  meta.task = "Sentiment Analysis";
  meta.task_definition = "Identify the sentiment of the tweet.";
  const GenerationPrompt p = build_generation_prompt(meta, InstructLanguage::english);
  CHECK(p.system_text == kGeneratorSystemPrompt);
  CHECK(p.user_text ==
        "We are creating an English instruction-following dataset for an Arabic dataset called: ArSAS covering the "
        "task of Sentiment Analysis. The user defined the task as follows: Identify the sentiment of the tweet. For "
        "that task, the labels include: positive, negative, neutral. Write 10 very diverse and concise English "
        "instructions. Return the instructions as strings in a list format as follows [].");

  const GenerationPrompt native = build_generation_prompt(meta, InstructLanguage::native, 5);
  CHECK(native.user_text.find("creating an Arabic instruction-following") != std::string::npos);
  CHECK(native.user_text.find("Write 5 very diverse and concise Arabic instructions") != std::string::npos);

  meta.language = Language::parse("hindi");
  CHECK(build_generation_prompt(meta, InstructLanguage::english).user_text.find("for a Hindi dataset") != std::string::npos);
}

TEST_CASE("summarization prompts omit the labels sentence") {
  DatasetMeta meta = testing::classification_meta("sum", {});
  meta.task_kind = TaskKind::summarization;
  meta.task = "News Summarization";
  const auto text = build_generation_prompt(meta, InstructLanguage::english).user_text;
  CHECK(text.find("labels include") == std::string::npos);
  CHECK(text.find("News Summarization") != std::string::npos);
}

TEST_CASE("missing task definition is an error") {
  DatasetMeta meta = testing::classification_meta();
  meta.task_definition = "  ";
  CHECK(kind_of([&] { build_generation_prompt(meta, InstructLanguage::english); }) == ErrorKind::MissingTaskDefinition);
}

TEST_CASE("distinct datasets give distinct prompts") {
  std::set<std::string> prompts;
  for (const std::string lang : {"arabic", "english", "hindi"}) {
    for (const std::string name : {"A", "B"}) {
      DatasetMeta meta = testing::classification_meta(name + lang);
      meta.name = name;
      meta.language = Language::parse(lang);
      prompts.insert(build_generation_prompt(meta, InstructLanguage::english).user_text);
    }
  }
  CHECK(prompts.size() == 6);
}

TEST_CASE("instruction lists parse from brackets or lines") {
  CHECK(parse_instruction_list(R"(Sure! ["one", 'two', "th\"ree"])", 3) ==
        std::vector<std::string>{"one", "two", "th\"ree"});
  CHECK(parse_instruction_list("```\n1. first\n2) second\n- third\n```", 3) ==
        std::vector<std::string>{"first", "second", "third"});
  CHECK(parse_instruction_list(R"(["one", "two"])", 3).empty());
  CHECK(parse_instruction_list("", 1).empty());
}

TEST_CASE("backend returns parsed instructions") {
  MockServer server([](int, const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    CHECK(body["model"] == "mock-model");
    CHECK(body["messages"].size() == 2);
    CHECK(body["messages"][0]["role"] == "system");
    res.set_content(chat_reply(numbered("Classify", 10)), "application/json");
  });
  const GenerationPrompt prompt = build_generation_prompt(testing::classification_meta(), InstructLanguage::english);
  CallReport report;
  const auto items = request_instructions(server.backend(), prompt, 10, &report);
  CHECK(items.size() == 10);
  CHECK(items[3] == "Classify instruction 3.");
  CHECK(report.attempts == 1);
  CHECK(report.retries == 0);
}

TEST_CASE("wrong instruction count is a malformed response after retries") {
  MockServer server([](int, const httplib::Request&, httplib::Response& res) {
    res.set_content(chat_reply(numbered("x", 8)), "application/json");
  });
  BackendConfig backend = server.backend();
  backend.max_retries = 2;
  const GenerationPrompt prompt = build_generation_prompt(testing::classification_meta(), InstructLanguage::english);
  CHECK(kind_of([&] { request_instructions(backend, prompt, 10); }) == ErrorKind::MalformedResponse);
  CHECK(server.calls() == 3);
}

TEST_CASE("server errors are retried") {
  MockServer server([](int call, const httplib::Request&, httplib::Response& res) {
    if (call == 0) {
      res.status = 503;
      return;
    }
    res.set_content(chat_reply(numbered("y", 10)), "application/json");
  });
  BackendConfig backend = server.backend();
  backend.max_retries = 1;
  const GenerationPrompt prompt = build_generation_prompt(testing::classification_meta(), InstructLanguage::english);
  CallReport report;
  CHECK(request_instructions(backend, prompt, 10, &report).size() == 10);
  CHECK(report.retries == 1);

  MockServer down([](int, const httplib::Request&, httplib::Response& res) { res.status = 500; });
  BackendConfig b2 = down.backend();
  b2.max_retries = 1;
  CHECK(kind_of([&] { request_instructions(b2, prompt, 10); }) == ErrorKind::TransportError);
  CHECK(down.calls() == 2);
}

TEST_CASE("authentication failures are not retried") {
  MockServer server([](int, const httplib::Request& req, httplib::Response& res) {
    CHECK(req.get_header_value("Authorization") == "Bearer wrong-key");
    res.status = 401;
  });
  BackendConfig backend = server.backend();
  backend.credential_env = "INSTRUCTKIT_TEST_KEY";
  ::setenv("INSTRUCTKIT_TEST_KEY", "wrong-key", 1);
  const GenerationPrompt prompt = build_generation_prompt(testing::classification_meta(), InstructLanguage::english);
  CHECK(kind_of([&] { request_instructions(backend, prompt, 10); }) == ErrorKind::AuthError);
  CHECK(server.calls() == 1);

  ::unsetenv("INSTRUCTKIT_TEST_KEY");
  CHECK(kind_of([&] { request_instructions(backend, prompt, 10); }) == ErrorKind::AuthError);
  CHECK(server.calls() == 1);
}

TEST_CASE("pool building suffixes, dedups and flags short pools") {
  const DatasetMeta meta = testing::classification_meta();
  auto a = numbered("A", 10);
  auto b = numbered("B", 10);
  b[4] = "  " + a[2] + " ";
  const InstructionPool pool = build_pool(meta, a, b, "");
  CHECK(pool.instructions.size() == 19);
  CHECK(pool.short_pool);
  CHECK(pool.system_role == kDefaultSystemRole);
  CHECK(pool.backend_tags.front() == "generator_a");
  CHECK(pool.backend_tags.back() == "generator_b");
  for (const auto& text : pool.instructions) CHECK(text.ends_with(kLabelSuffix));

  CHECK_FALSE(build_pool(meta, numbered("A", 10), numbered("B", 10), "role").short_pool);
  CHECK(kind_of([&] { build_pool(meta, {}, numbered("B", 10), ""); }) == ErrorKind::EmptyGeneration);
}

TEST_CASE("suffixing is idempotent") {
  const std::string once = with_suffix("Label the tweet.", TaskKind::single_label);
  CHECK(once == "Label the tweet. " + std::string(kLabelSuffix));
  CHECK(with_suffix(once, TaskKind::single_label) == once);
  CHECK(with_suffix("Summarize.", TaskKind::summarization).ends_with(kSummarySuffix));
}

TEST_CASE("pools round-trip through files and load applies missing suffixes") {
  testing::TempDir dir;
  const InstructionPool pool =
      build_pool(testing::classification_meta(), numbered("A", 10), numbered("B", 10), "role", InstructLanguage::native);
  const auto path = dir / pool_filename(pool.dataset_id, pool.instruct_language);
  CHECK(path.filename() == "ds.native.pool.json");
  save_pool(pool, path);
  CHECK(load_pool(path) == pool);

  const auto bare = dir.write("bare.json", R"({"dataset_id": "ds", "instructions": ["Tag it.", {"text": "Label it.", "backend": "b"}]})");
  std::vector<std::string> warnings;
  const InstructionPool loaded = load_pool(bare, &warnings);
  CHECK(warnings.size() == 2);
  CHECK(loaded.instructions[1] == "Label it. " + std::string(kLabelSuffix));

  const auto dup = dir.write("dup.json", R"({"dataset_id": "ds", "instructions": ["Tag it.", "Tag   it."]})");
  CHECK(kind_of([&] { load_pool(dup); }) == ErrorKind::InvariantViolation);
  const auto empty = dir.write("empty.json", R"({"dataset_id": "ds", "instructions": []})");
  CHECK(kind_of([&] { load_pool(empty); }) == ErrorKind::InvariantViolation);
  const auto junk = dir.write("junk.json", "not json");
  CHECK(kind_of([&] { load_pool(junk); }) == ErrorKind::ParseError);
}
