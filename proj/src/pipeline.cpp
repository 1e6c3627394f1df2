#include "instructkit/pipeline.hpp"

#include <algorithm>
#include <future>
#include <set>

#include "instructkit/error.hpp"
#include "instructkit/io.hpp"
#include "instructkit/postprocess.hpp"

namespace instructkit {

namespace fs = std::filesystem;
using io::json;

std::string_view to_string(Command command) {
  switch (command) {
    case Command::ingest: return "ingest";
    case Command::preprocess: return "preprocess";
    case Command::geninstruct: return "geninstruct";
    case Command::assemble: return "assemble";
    case Command::export_: return "export";
    case Command::eval: return "eval";
    case Command::report: return "report";
    case Command::stats: return "stats";
  }
  return "ingest";
}

Command parse_command(std::string_view text) {
  for (Command c : {Command::ingest, Command::preprocess, Command::geninstruct, Command::assemble, Command::export_,
                    Command::eval, Command::report, Command::stats}) {
    if (to_string(c) == text) return c;
  }
  throw Error(ErrorKind::ConfigError, "unknown command '" + std::string(text) + "'");
}

namespace {

void say(const RunConfig& config, const std::string& message) {
  if (config.log) config.log(message);
}

/// Stage bookkeeping: a fingerprint of parameters and input checksums,
/// compared against the previous stage.json before doing any work.
class StageRun {
 public:
  StageRun(const RunConfig& config, Command command, fs::path dir)
      : config_(config), command_(command), dir_(std::move(dir)) {
    fingerprint_ = {{"stage", to_string(command)}, {"version", kToolVersion}, {"params", json::object()}, {"inputs", json::object()}};
  }

  const fs::path& dir() const { return dir_; }

  void param(const std::string& key, json value) { fingerprint_["params"][key] = std::move(value); }

  void input(const fs::path& path) {
    if (!fs::exists(path)) {
      throw Error(ErrorKind::MissingPrerequisite, std::string(to_string(command_)) + ": missing input " + path.string());
    }
    fingerprint_["inputs"][path.lexically_normal().string()] = io::sha256_file(path);
  }

  /// True when a previous run with the same fingerprint left intact outputs.
  bool up_to_date() const {
    if (config_.force) return false;
    const fs::path stage_file = dir_ / "stage.json";
    if (!fs::exists(stage_file)) return false;
    try {
      const json previous = json::parse(io::read_file(stage_file));
      if (previous.at("fingerprint") != fingerprint_) return false;
      for (const auto& [name, sha] : previous.at("outputs").items()) {
        if (!fs::exists(dir_ / name) || io::sha256_file(dir_ / name) != sha.get<std::string>()) return false;
      }
      return true;
    } catch (const json::exception&) {
      return false;
    }
  }

  StageResult skipped() const {
    say(config_, std::string(to_string(command_)) + ": inputs unchanged, skipping (" + (dir_ / "stage.json").string() + ")");
    const json previous = json::parse(io::read_file(dir_ / "stage.json"));
    return {command_, true, dir_, previous.value("summary", json::object())};
  }

  void output(const std::string& name, std::string_view contents) {
    io::write_file(dir_ / name, contents);
    outputs_[name] = io::sha256_hex(contents);
  }

  void output_existing(const std::string& name) { outputs_[name] = io::sha256_file(dir_ / name); }

  StageResult finish(json summary) {
    const json manifest = {{"fingerprint", fingerprint_}, {"outputs", outputs_}, {"summary", summary}};
    io::write_file(dir_ / "stage.json", manifest.dump(2) + "\n");
    say(config_, std::string(to_string(command_)) + ": wrote " + std::to_string(outputs_.size()) + " files to " + dir_.string());
    return {command_, false, dir_, std::move(summary)};
  }

 private:
  const RunConfig& config_;
  Command command_;
  fs::path dir_;
  json fingerprint_;
  json outputs_ = json::object();
};

CorpusManifest require_manifest(const RunConfig& config) {
  if (config.manifest.empty()) throw Error(ErrorKind::ConfigError, "a corpus manifest is required");
  return load_manifest(config.manifest);
}

std::uint64_t resolve_seed(const RunConfig& config, const CorpusManifest& manifest) {
  return config.seed ? *config.seed : manifest.default_seed;
}

std::string records_name(const std::string& id) { return id + ".jsonl"; }

StageResult run_ingest(const RunConfig& config) {
  const CorpusManifest manifest = require_manifest(config);
  StageRun stage(config, Command::ingest, config.out_dir / "ingest");
  stage.input(config.manifest);
  for (const auto& meta : manifest.datasets) {
    for (const auto& [split, source] : meta.sources) stage.input(source.path);
  }
  if (stage.up_to_date()) return stage.skipped();

  const auto results = ingest_all(manifest);
  json reports = json::array();
  std::size_t total = 0;
  for (const auto& r : results) {
    std::string lines;
    for (const auto& rec : r.records) lines += io::dump_line(record_to_json(rec));
    stage.output(records_name(r.report.dataset_id), lines);
    reports.push_back({{"dataset_id", r.report.dataset_id},
                       {"rows_in", r.report.rows_in},
                       {"records_out", r.report.records_out},
                       {"dropped_empty_text", r.report.dropped_empty_text},
                       {"dropped_conflicting_labels", r.report.dropped_conflicting_labels},
                       {"warnings", r.report.warnings}});
    for (const auto& w : r.report.warnings) say(config, "ingest: " + r.report.dataset_id + ": " + w);
    total += r.records.size();
  }
  stage.output("report.json", reports.dump(2) + "\n");
  return stage.finish({{"datasets", results.size()}, {"records", total}});
}

StageResult run_preprocess(const RunConfig& config) {
  const CorpusManifest manifest = require_manifest(config);
  const std::uint64_t seed = resolve_seed(config, manifest);
  config.ratios.validate();
  if (!(config.dev_fraction >= 0.0 && config.dev_fraction < 1.0)) {
    throw Error(ErrorKind::InvalidRatios, "dev fraction must be in [0, 1)");
  }
  const fs::path in_dir = config.out_dir / "ingest";
  StageRun stage(config, Command::preprocess, config.out_dir / "preprocess");
  stage.input(config.manifest);
  for (const auto& meta : manifest.datasets) stage.input(in_dir / records_name(meta.id));
  stage.param("ratios", {config.ratios.train, config.ratios.test, config.ratios.dev});
  stage.param("dev_fraction", config.dev_fraction);
  stage.param("min_letters", config.min_letters);
  stage.param("seed", seed);
  if (stage.up_to_date()) return stage.skipped();

  PreprocessOptions options{config.ratios, config.dev_fraction, config.min_letters, seed};
  std::vector<std::future<PreprocessResult>> jobs;
  for (const auto& meta : manifest.datasets) {
    jobs.push_back(std::async(std::launch::async, [&meta, &options, &in_dir] {
      return preprocess_dataset(meta, read_records(in_dir / records_name(meta.id)), options);
    }));
  }
  json reports = json::array();
  json counts = json::object();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const PreprocessResult result = jobs[i].get();
    std::string lines;
    std::map<std::string, std::size_t> per_split;
    for (const auto& rec : result.records) {
      lines += io::dump_line(record_to_json(rec));
      ++per_split[std::string(to_string(rec.split))];
    }
    stage.output(records_name(manifest.datasets[i].id), lines);
    reports.push_back(result.report.to_json());
    counts[manifest.datasets[i].id] = per_split;
  }
  stage.output("report.json", reports.dump(2) + "\n");
  return stage.finish({{"seed", seed}, {"splits", counts}});
}

struct GenerationJob {
  const DatasetMeta* meta;
  const BackendConfig* backend;
  std::vector<std::string> instructions;
  CallReport report;
};

StageResult run_geninstruct(const RunConfig& config) {
  const CorpusManifest manifest = require_manifest(config);
  if (config.pools_dir.empty() == config.backends.empty()) {
    throw Error(ErrorKind::ConfigError, "geninstruct needs exactly one of --pools or --backends");
  }
  StageRun stage(config, Command::geninstruct, config.out_dir / "instructions");
  stage.input(config.manifest);
  stage.param("instruct_language", to_string(config.instruct_language));
  stage.param("n", config.instructions_per_backend);
  stage.param("system_role", config.system_role);

  std::vector<std::string> warnings;
  std::map<std::string, InstructionPool> pools;
  if (!config.pools_dir.empty()) {
    for (const auto& meta : manifest.datasets) stage.input(config.pools_dir / pool_filename(meta.id, config.instruct_language));
    if (stage.up_to_date()) return stage.skipped();
    for (const auto& meta : manifest.datasets) {
      InstructionPool pool = load_pool(config.pools_dir / pool_filename(meta.id, config.instruct_language), &warnings);
      if (pool.dataset_id != meta.id) {
        throw Error(ErrorKind::InvariantViolation, "pool for " + meta.id + " names dataset " + pool.dataset_id);
      }
      pools[meta.id] = std::move(pool);
    }
  } else {
    stage.input(config.backends);
    if (stage.up_to_date()) return stage.skipped();
    const json spec = json::parse(io::read_file(config.backends));
    std::vector<BackendConfig> backends;
    for (const auto& b : spec.at("generators")) backends.push_back(BackendConfig::from_json(b));
    if (backends.size() != 2) throw Error(ErrorKind::ConfigError, "exactly two generators are required");

    std::vector<GenerationJob> jobs;
    for (const auto& meta : manifest.datasets) {
      for (const auto& b : backends) jobs.push_back({&meta, &b, {}, {}});
    }
    const std::size_t width = std::max<std::size_t>(1, config.max_in_flight);
    for (std::size_t begin = 0; begin < jobs.size(); begin += width) {
      std::vector<std::future<void>> running;
      for (std::size_t k = begin; k < std::min(jobs.size(), begin + width); ++k) {
        running.push_back(std::async(std::launch::async, [&job = jobs[k], &config] {
          const GenerationPrompt prompt = build_generation_prompt(*job.meta, config.instruct_language, config.instructions_per_backend);
          job.instructions = request_instructions(*job.backend, prompt, config.instructions_per_backend, &job.report);
        }));
      }
      for (auto& f : running) f.get();
    }
    for (std::size_t i = 0; i < jobs.size(); i += 2) {
      const DatasetMeta& meta = *jobs[i].meta;
      pools[meta.id] = build_pool(meta, jobs[i].instructions, jobs[i + 1].instructions, config.system_role,
                                  config.instruct_language, {backends[0].name, backends[1].name},
                                  2 * config.instructions_per_backend);
      for (std::size_t k = i; k < i + 2; ++k) {
        if (jobs[k].report.retries > 0) {
          warnings.push_back(meta.id + ": " + jobs[k].backend->name + " needed " + std::to_string(jobs[k].report.retries) + " retries");
        }
      }
    }
  }

  json sizes = json::object();
  for (const auto& [id, pool] : pools) {
    if (pool.short_pool) warnings.push_back(id + ": pool has only " + std::to_string(pool.instructions.size()) + " instructions");
    stage.output(pool_filename(id, config.instruct_language), pool_to_json(pool).dump(2) + "\n");
    sizes[id] = pool.instructions.size();
  }
  for (const auto& w : warnings) say(config, "geninstruct: " + w);
  return stage.finish({{"pools", sizes}, {"warnings", warnings}});
}

StageResult run_assemble(const RunConfig& config) {
  const CorpusManifest manifest = require_manifest(config);
  const std::uint64_t seed = resolve_seed(config, manifest);
  const fs::path pre_dir = config.out_dir / "preprocess";
  const fs::path pool_dir = config.out_dir / "instructions";
  StageRun stage(config, Command::assemble, config.out_dir / "assemble");
  stage.input(config.manifest);
  for (const auto& meta : manifest.datasets) {
    stage.input(pre_dir / records_name(meta.id));
    stage.input(pool_dir / pool_filename(meta.id, config.instruct_language));
  }
  stage.param("seed", seed);
  stage.param("cap", config.cap);
  stage.param("strategy", to_string(config.strategy));
  stage.param("language_mode", config.language_mode == LanguageShuffleMode::samples ? "samples" : "datasets");
  stage.param("instruct_language", to_string(config.instruct_language));
  if (stage.up_to_date()) return stage.skipped();

  SamplesByDataset train;
  SamplesByDataset dev;
  std::vector<EvalPrompt> prompts;
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& meta : manifest.datasets) {
    const auto records = read_records(pre_dir / records_name(meta.id));
    const InstructionPool pool = load_pool(pool_dir / pool_filename(meta.id, config.instruct_language));
    std::vector<Record> train_records, dev_records, test_records;
    for (const auto& r : records) {
      if (r.split == Split::train) train_records.push_back(r);
      if (r.split == Split::dev) dev_records.push_back(r);
      if (r.split == Split::test) test_records.push_back(r);
    }
    const auto capped = sample_training(train_records, config.cap, seed, meta.id);
    counts[meta.id] = {train_records.size(), capped.size()};
    train[meta.id] = attach_instructions(capped, pool, meta, seed);
    dev[meta.id] = attach_instructions(dev_records, pool, meta, seed);
    const auto p = build_eval_prompts(test_records, pool, meta);
    prompts.insert(prompts.end(), p.begin(), p.end());
  }

  ExportManifest m = export_training(shuffle(train, config.strategy, seed, config.language_mode),
                                     stage.dir() / "train.jsonl", config.strategy, seed);
  m.output_path = "train.jsonl";
  m.counts = counts;
  stage.output_existing("train.jsonl");
  export_training(shuffle(dev, ShuffleStrategy::alphabetical, seed), stage.dir() / "dev.jsonl", ShuffleStrategy::alphabetical, seed);
  stage.output_existing("dev.jsonl");
  write_eval_prompts(stage.dir() / "eval_prompts.jsonl", prompts);
  stage.output_existing("eval_prompts.jsonl");
  stage.output("manifest.json", m.to_json().dump(2) + "\n");
  say(config, "assemble: " + std::to_string(m.total) + " training samples, sha256 " + m.sha256);
  return stage.finish({{"train", m.total}, {"eval_prompts", prompts.size()}, {"sha256", m.sha256}});
}

StageResult run_export(const RunConfig& config) {
  const fs::path in_dir = config.out_dir / "assemble";
  StageRun stage(config, Command::export_, config.out_dir / "export");
  for (const char* name : {"train.jsonl", "dev.jsonl", "eval_prompts.jsonl", "manifest.json"}) stage.input(in_dir / name);
  stage.param("trainer_preset", config.trainer_preset);
  if (stage.up_to_date()) return stage.skipped();

  const TrainerSettings settings = TrainerSettings::preset_named(config.trainer_preset);
  const auto train = read_training_file(in_dir / "train.jsonl");
  const auto dev_samples = read_training_file(in_dir / "dev.jsonl");
  const auto prompts = read_eval_prompts(in_dir / "eval_prompts.jsonl");

  json files = json::object();
  for (const char* name : {"train.jsonl", "dev.jsonl", "eval_prompts.jsonl"}) {
    const std::string contents = io::read_file(in_dir / name);
    stage.output(name, contents);
    files[name] = io::sha256_hex(contents);
  }
  json assembled = json::parse(io::read_file(in_dir / "manifest.json"));
  const json trainer = {{"training_file", "train.jsonl"},
                        {"dev_file", "dev.jsonl"},
                        {"eval_prompts_file", "eval_prompts.jsonl"},
                        {"settings", settings.to_json()}};
  stage.output("trainer_config.json", trainer.dump(2) + "\n");
  stage.output("manifest.json", json{{"assembly", assembled}, {"files", files}}.dump(2) + "\n");
  return stage.finish({{"train", train.size()}, {"dev", dev_samples.size()}, {"eval_prompts", prompts.size()},
                       {"sha256", files["train.jsonl"]}});
}

}  // namespace

std::vector<EvalOutcome> evaluate_predictions(const CorpusManifest& manifest, const std::vector<EvalPrompt>& prompts,
                                              const std::vector<Prediction>& predictions,
                                              const std::string& prediction_file, json* extraction_log) {
  std::map<std::string, const std::string*> by_id;
  for (const auto& p : predictions) by_id[p.record_id] = &p.text;

  std::map<std::string, std::vector<const EvalPrompt*>> by_dataset;
  for (const auto& p : prompts) by_dataset[p.dataset_id].push_back(&p);

  std::vector<EvalOutcome> outcomes;
  for (const auto& meta : manifest.datasets) {
    const auto it = by_dataset.find(meta.id);
    if (it == by_dataset.end()) continue;
    std::vector<ScoredPair> pairs;
    std::size_t missing = 0;
    for (const EvalPrompt* prompt : it->second) {
      const auto pred = by_id.find(prompt->record_id);
      std::string text;
      if (pred == by_id.end()) {
        ++missing;
      } else {
        text = *pred->second;
      }
      ScoredPair pair = score_input(text, prompt->gold, meta);
      if (extraction_log) {
        extraction_log->push_back({{"record_id", prompt->record_id},
                                   {"dataset_id", meta.id},
                                   {"predicted", pair.predicted},
                                   {"gold", prompt->gold},
                                   {"unparseable", pair.unparseable},
                                   {"missing", pred == by_id.end()}});
      }
      pairs.push_back(std::move(pair));
    }
    EvalOutcome outcome = evaluate_dataset(pairs, meta);
    outcome.missing_predictions = missing;
    outcome.prediction_file = prediction_file;
    outcomes.push_back(std::move(outcome));
  }
  return outcomes;
}

ResultTable results_from_outcomes(const CorpusManifest& manifest,
                                  const std::map<std::string, std::vector<EvalOutcome>>& outcomes_by_column) {
  std::vector<std::string> columns{"sota"};
  for (const auto& [column, _] : outcomes_by_column) columns.push_back(column);
  ResultTable table({"task", "metric"}, columns);

  std::vector<const DatasetMeta*> metas;
  for (const auto& meta : manifest.datasets) metas.push_back(&meta);
  std::stable_sort(metas.begin(), metas.end(), [](const DatasetMeta* a, const DatasetMeta* b) {
    if (a->language != b->language) return a->language < b->language;
    return a->name < b->name;
  });
  for (const DatasetMeta* meta : metas) {
    ResultRow row;
    row.language = meta->language.tag();
    row.dataset = meta->name;
    row.attributes = {{"task", meta->task}, {"metric", meta->metric.short_name()}};
    row.scores["sota"] = meta->sota_score;
    bool any = false;
    for (const auto& [column, outcomes] : outcomes_by_column) {
      for (const auto& o : outcomes) {
        if (o.dataset_id == meta->id) {
          row.scores[column] = o.score;
          any = true;
        }
      }
    }
    if (any) table.add_row(std::move(row));
  }
  return table;
}

namespace {

StageResult run_eval(const RunConfig& config) {
  if (config.predictions.empty()) {
    throw Error(ErrorKind::MissingPrerequisite, "eval: no predictions file given (--predictions)");
  }
  const CorpusManifest manifest = require_manifest(config);
  const fs::path prompts_path = config.out_dir / "export" / "eval_prompts.jsonl";
  StageRun stage(config, Command::eval, config.out_dir / "eval");
  stage.input(config.manifest);
  stage.input(prompts_path);
  json columns = json::array();
  for (const auto& [column, path] : config.predictions) {
    stage.input(path);
    columns.push_back({column, path.lexically_normal().string()});
  }
  stage.param("columns", columns);
  if (stage.up_to_date()) return stage.skipped();

  const auto prompts = read_eval_prompts(prompts_path);
  std::set<std::string> known;
  for (const auto& p : prompts) known.insert(p.record_id);

  json outcomes = json::object();
  json summary = json::object();
  for (const auto& [column, path] : config.predictions) {
    const auto predictions = read_predictions(path);
    std::size_t extra = 0;
    for (const auto& p : predictions) extra += known.contains(p.record_id) ? 0 : 1;
    if (extra > 0) say(config, "eval: " + path.string() + " has " + std::to_string(extra) + " predictions for records outside the eval prompts");

    json log = json::array();
    const auto scored = evaluate_predictions(manifest, prompts, predictions, path.string(), &log);
    std::string lines;
    for (const auto& entry : log) lines += io::dump_line(entry);
    stage.output("extractions." + column + ".jsonl", lines);

    json list = json::array();
    for (const auto& o : scored) {
      list.push_back(o.to_json());
      if (o.unparseable > 0 || o.missing_predictions > 0) {
        say(config, "eval: " + column + "/" + o.dataset_id + ": " + std::to_string(o.unparseable) + " of " +
                        std::to_string(o.pairs) + " unparseable, " + std::to_string(o.missing_predictions) + " missing");
      }
      summary[column][o.dataset_id] = o.score;
    }
    outcomes[column] = list;
  }
  stage.output("outcomes.json", outcomes.dump(2) + "\n");
  return stage.finish(summary);
}

fs::path with_csv_fallback(const fs::path& path) {
  if (fs::exists(path) || path.extension() == ".csv") return path;
  fs::path alt = path;
  alt += ".csv";
  return fs::exists(alt) ? alt : path;
}

WilcoxonResult paired_stats(const fs::path& path, const std::pair<std::string, std::string>& cols, std::size_t* pairs) {
  const ResultTable table = load_result_table(path);
  const auto a = table.column(cols.first);
  const auto b = table.column(cols.second);
  std::vector<double> x, y;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] && b[i]) {
      x.push_back(*a[i]);
      y.push_back(*b[i]);
    }
  }
  if (pairs) *pairs = x.size();
  return wilcoxon_signed_rank(x, y);
}

StageResult run_report(const RunConfig& config) {
  StageRun stage(config, Command::report, config.out_dir / "report");
  ResultTable table;
  if (!config.table.empty()) {
    stage.input(config.table);
  } else {
    stage.input(config.manifest);
    stage.input(config.out_dir / "eval" / "outcomes.json");
  }
  const fs::path paired = config.paired_table.empty() ? fs::path() : with_csv_fallback(config.paired_table);
  if (!paired.empty()) stage.input(paired);
  stage.param("delta_column", config.delta_column);
  stage.param("average_per_column", config.average_per_column);
  stage.param("format", config.report_format == ReportFormat::markdown ? "markdown" : "csv");
  stage.param("stats_columns", {config.stats_columns.first, config.stats_columns.second});
  if (stage.up_to_date()) return stage.skipped();

  if (!config.table.empty()) {
    table = load_result_table(config.table);
  } else {
    const CorpusManifest manifest = require_manifest(config);
    const json outcomes = json::parse(io::read_file(config.out_dir / "eval" / "outcomes.json"));
    std::map<std::string, std::vector<EvalOutcome>> by_column;
    for (const auto& [column, list] : outcomes.items()) {
      for (const auto& o : list) by_column[column].push_back(EvalOutcome::from_json(o));
    }
    table = results_from_outcomes(manifest, by_column);
  }
  if (table.rows().empty()) throw Error(ErrorKind::EmptyInput, "report: no result rows");

  ReportContent content;
  std::string model = config.delta_column;
  if (model.empty()) {
    for (const std::string candidate : {"model_english", "model_native"}) {
      if (table.has_column(candidate)) {
        model = candidate;
        break;
      }
    }
  }
  if (model.empty()) {
    for (const auto& c : table.score_columns()) {
      if (c != "sota" && c != "base" && c != "delta") {
        model = c;
        break;
      }
    }
  }
  const bool has_sota = table.has_column("sota");
  if (has_sota && !model.empty()) compute_delta(table, model, "sota", "delta");

  for (const std::string c : {"sota", "base"}) {
    if (table.has_column(c)) content.columns.push_back(c);
  }
  for (const auto& c : table.score_columns()) {
    if (c != "sota" && c != "base" && c != "delta") content.columns.push_back(c);
  }
  if (table.has_column("delta")) content.columns.push_back("delta");

  AverageOptions options;
  if (has_sota && !config.average_per_column) options.require_column = "sota";
  content.averages = aggregate_averages(table, options);
  if (table.has_column("base") && !model.empty()) {
    content.improvements = relative_improvement(table, model, "base");
    content.improvement_label = model + " over base";
  }
  json summary = {{"rows", table.rows().size()}, {"delta_model", model}};
  if (!paired.empty()) {
    std::size_t pairs = 0;
    const WilcoxonResult w = paired_stats(paired, config.stats_columns, &pairs);
    content.stats.push_back({config.stats_columns.first + " vs " + config.stats_columns.second, w});
    summary["wilcoxon"] = w.to_json();
  }
  content.table = table;

  if (config.report_format == ReportFormat::markdown) {
    stage.output("report.md", render_markdown(content));
  } else {
    stage.output("report.csv", render_csv(table));
  }
  stage.output("results.csv", render_csv(table));
  json averages = json::array();
  for (const auto& g : content.averages) {
    json cols = json::object();
    for (const auto& [c, avg] : g.columns) {
      cols[c] = avg ? json{{"mean", avg->mean}, {"count", avg->count}} : json(nullptr);
    }
    averages.push_back({{"language", g.language}, {"rows", g.rows}, {"columns", cols}});
  }
  stage.output("averages.json", averages.dump(2) + "\n");
  return stage.finish(summary);
}

StageResult run_stats(const RunConfig& config) {
  if (config.paired_table.empty()) throw Error(ErrorKind::ConfigError, "stats needs --paired-table");
  const fs::path paired = with_csv_fallback(config.paired_table);
  StageRun stage(config, Command::stats, config.out_dir / "stats");
  stage.input(paired);
  stage.param("columns", {config.stats_columns.first, config.stats_columns.second});
  if (stage.up_to_date()) return stage.skipped();

  std::size_t pairs = 0;
  const WilcoxonResult w = paired_stats(paired, config.stats_columns, &pairs);
  json result = w.to_json();
  result["pairs"] = pairs;
  result["columns"] = {config.stats_columns.first, config.stats_columns.second};
  stage.output("wilcoxon.json", result.dump(2) + "\n");
  return stage.finish(result);
}

}  // namespace

StageResult run(Command command, const RunConfig& config) {
  switch (command) {
    case Command::ingest: return run_ingest(config);
    case Command::preprocess: return run_preprocess(config);
    case Command::geninstruct: return run_geninstruct(config);
    case Command::assemble: return run_assemble(config);
    case Command::export_: return run_export(config);
    case Command::eval: return run_eval(config);
    case Command::report: return run_report(config);
    case Command::stats: return run_stats(config);
  }
  throw Error(ErrorKind::ConfigError, "unknown command");
}

}  // namespace instructkit
