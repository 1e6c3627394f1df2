#include <doctest.h>

#include "helpers.hpp"
#include "instructkit/corpus.hpp"
#include "instructkit/error.hpp"

using namespace instructkit;

namespace {

std::string dataset_json(const std::string& id, const std::string& extra = "",
                         const std::string& source = R"("all": {"path": "d.csv"})") {
  return R"({"id": ")" + id + R"(", "language": "english", "task": "Sentiment",
             "task_definition": "Classify the sentiment.", "label_space": ["positive", "negative"],
             "metric": "accuracy", "sources": {)" + source + "}" + extra + "}";
}

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

TEST_CASE("minimal manifest loads") {
  testing::TempDir dir;
  dir.write("d.csv", "text,label\nhello there,positive\n");
  const auto path = dir.write("m.json", R"({"version": "1", "seed": 9, "datasets": [)" + dataset_json("one") + "]}");
  const CorpusManifest m = load_manifest(path);
  REQUIRE(m.datasets.size() == 1);
  CHECK(m.default_seed == 9);
  CHECK(m.datasets[0].label_space.size() == 2);
  CHECK_FALSE(m.datasets[0].sota_score.has_value());
  CHECK(m.datasets[0].sources.at("all").path == (dir / "d.csv").string());
}

TEST_CASE("manifest validation errors") {
  const std::string base = ".";
  CHECK(kind_of([&] {
          parse_manifest(R"({"datasets": [)" + dataset_json("arsas") + "," + dataset_json("arsas") + "]}", base);
        }) == ErrorKind::DuplicateDatasetId);
  CHECK(kind_of([&] {
          parse_manifest(R"({"datasets": [)" + dataset_json("a", R"(, "name": "same")") + "," +
                             dataset_json("b", R"(, "name": "same")") + "]}",
                         base);
        }) == ErrorKind::DuplicateDatasetId);
  CHECK(kind_of([&] { parse_manifest(R"({"datasets": [{"id": "x", "language": "english", "task": "t", "metric": "accuracy", "label_space": [], "sources": {"all": {"path": "d.csv"}}}]})", base); }) ==
        ErrorKind::InvalidLabelSpace);
  CHECK(kind_of([&] { parse_manifest(R"({"datasets": [{"id": "x", "language": "english", "task": "t", "metric": "accuracy", "label_space": ["Positive"], "sources": {"all": {"path": "d.csv"}}}]})", base); }) ==
        ErrorKind::InvalidLabelSpace);
  CHECK(kind_of([&] { parse_manifest(R"({"datasets": [)" + dataset_json("x", R"(, "sota": 1.5)") + "]}", base); }) ==
        ErrorKind::ParseError);
  CHECK(kind_of([&] { parse_manifest("{\"datasets\": [\n{\"id\": }]}", base); }) == ErrorKind::ParseError);
  CHECK(kind_of([&] { parse_manifest(R"({"datasets": []})", base); }) == ErrorKind::ParseError);
  CHECK(kind_of([&] { load_manifest("/nonexistent/manifest.json"); }) == ErrorKind::MissingFile);
}

TEST_CASE("summarization dataset takes an empty label space") {
  const auto m = parse_manifest(R"({"datasets": [{"id": "sum", "language": "arabic", "task": "News Summarization",
      "task_definition": "Summarize.", "task_kind": "summarization", "label_space": [], "metric": "rouge2",
      "sources": {"all": {"path": "s.jsonl"}}}]})",
                                ".");
  REQUIRE(m.datasets.size() == 1);
  CHECK(m.datasets[0].label_space.empty());
  CHECK(m.datasets[0].task_kind == TaskKind::summarization);
}

TEST_CASE("rouge2 is reserved for summarization") {
  CHECK(kind_of([&] { parse_manifest(R"({"datasets": [)" + dataset_json("x").replace(dataset_json("x").find("accuracy"), 8, "rouge2") + "]}", "."); }) ==
        ErrorKind::MetricTaskMismatch);
}

TEST_CASE("ingestion keeps order, admits any case and counts drops") {
  testing::TempDir dir;
  dir.write("d.csv", "text,label\nfirst row,positive\nsecond row,Positive\n,negative\nfourth row,negative\n");
  const auto m = parse_manifest(R"({"datasets": [)" + dataset_json("one") + "]}", dir.path());
  const IngestResult r = ingest_dataset(m.datasets[0]);
  REQUIRE(r.records.size() == 3);
  CHECK(r.records[0].record_id == "one:0");
  CHECK(r.records[1].labels == LabelSet{"Positive"});
  CHECK(r.records[2].ordinal == 3);
  CHECK(r.report.rows_in == 4);
  CHECK(r.report.dropped_empty_text == 1);
  CHECK(r.report.rows_in == r.report.records_out + r.report.dropped());
  for (const auto& rec : r.records) CHECK(rec.split == Split::unassigned);

  const IngestResult again = ingest_dataset(m.datasets[0]);
  CHECK(again.records == r.records);
}

TEST_CASE("ingestion rejects labels outside the space") {
  testing::TempDir dir;
  dir.write("d.csv", "text,label\nsome text,mixed\n");
  const auto m = parse_manifest(R"({"datasets": [)" + dataset_json("one") + "]}", dir.path());
  CHECK(kind_of([&] { ingest_dataset(m.datasets[0]); }) == ErrorKind::LabelOutsideSpace);
}

TEST_CASE("ingestion rejects unknown columns") {
  testing::TempDir dir;
  dir.write("d.csv", "body,label\nsome text,positive\n");
  const auto m = parse_manifest(R"({"datasets": [)" + dataset_json("one") + "]}", dir.path());
  CHECK(kind_of([&] { ingest_dataset(m.datasets[0]); }) == ErrorKind::UnknownColumn);
}

TEST_CASE("presplit sources carry their split and declared variants are admitted") {
  testing::TempDir dir;
  dir.write("train.tsv", "text\tlabel\nalpha beta\tpos\ngamma delta\tnegative\n");
  dir.write("test.jsonl", "{\"text\": \"epsilon\", \"label\": \"NEG\"}\n");
  const auto m = parse_manifest(R"({"datasets": [)" +
                                    dataset_json("p", R"(, "presplit": true, "label_map": {"positive": ["pos"], "negative": ["neg"]})",
                                                 R"("train": {"path": "train.tsv"}, "test": {"path": "test.jsonl"})") +
                                    "]}",
                                dir.path());
  const IngestResult r = ingest_dataset(m.datasets[0]);
  REQUIRE(r.records.size() == 3);
  CHECK(r.records[0].split == Split::train);
  CHECK(r.records[2].split == Split::test);
  CHECK(r.records[2].ordinal == 2);
}

TEST_CASE("single-label rows resolving to two labels are dropped") {
  testing::TempDir dir;
  dir.write("d.jsonl", "{\"text\": \"conflict\", \"label\": [\"positive\", \"negative\"]}\n{\"text\": \"fine\", \"label\": \"positive\"}\n");
  const auto m = parse_manifest(R"({"datasets": [)" + dataset_json("c", "", R"("all": {"path": "d.jsonl"})") + "]}", dir.path());
  const IngestResult r = ingest_dataset(m.datasets[0]);
  CHECK(r.records.size() == 1);
  CHECK(r.report.dropped_conflicting_labels == 1);
}

TEST_CASE("multi-label fields split on the declared delimiter") {
  testing::TempDir dir;
  dir.write("d.csv", "text,label\nsome text,positive|negative\n");
  const auto m = parse_manifest(
      R"({"datasets": [{"id": "ml", "language": "english", "task": "Topics", "task_definition": "Tag topics.",
          "task_kind": "multi_label", "label_space": ["positive", "negative"], "metric": "micro_f1",
          "label_delimiter": "|", "sources": {"all": {"path": "d.csv"}}}]})",
      dir.path());
  const IngestResult r = ingest_dataset(m.datasets[0]);
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].labels == LabelSet{"negative", "positive"});
}

TEST_CASE("label map files merge into variants") {
  testing::TempDir dir;
  dir.write("map.tsv", "Check-worthiness\tcheckworthy\n");
  dir.write("d.csv", "text,label\nsome text,Check-worthiness\n");
  const auto m = parse_manifest(
      R"({"datasets": [{"id": "cw", "language": "english", "task": "Checkworthiness", "task_definition": "Decide.",
          "label_space": ["checkworthy", "not_checkworthy"], "metric": "f1_positive:checkworthy",
          "label_map_file": "map.tsv", "sources": {"all": {"path": "d.csv"}}}]})",
      dir.path());
  CHECK(m.datasets[0].label_variants.at("checkworthy") == std::vector<std::string>{"Check-worthiness"});
  CHECK(ingest_dataset(m.datasets[0]).records.size() == 1);
}

TEST_CASE("shipped fixture corpus ingests") {
  const auto m = load_manifest(std::string(INSTRUCTKIT_FIXTURES_DIR) + "/corpus/manifest.json");
  CHECK(m.datasets.size() == 6);
  std::size_t total = 0;
  for (const auto& r : ingest_all(m)) {
    CHECK(r.report.rows_in == r.report.records_out + r.report.dropped());
    total += r.report.rows_in;
  }
  CHECK(total == 600);
}
