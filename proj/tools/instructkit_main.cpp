// Command-line entry point for the instruction-dataset pipeline.
//
// Exit codes: 0 ok, 2 configuration, 3 missing prerequisite, 4 data error,
// 5 transport.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "instructkit/error.hpp"
#include "instructkit/pipeline.hpp"

namespace {

int exit_code(instructkit::ErrorCategory category) {
  switch (category) {
    case instructkit::ErrorCategory::config: return 2;
    case instructkit::ErrorCategory::missing_prerequisite: return 3;
    case instructkit::ErrorCategory::data: return 4;
    case instructkit::ErrorCategory::transport: return 5;
  }
  return 4;
}

std::pair<std::string, std::string> split_pair(const std::string& text, char sep) {
  const auto pos = text.find(sep);
  if (pos == std::string::npos) return {std::string(), text};
  return {text.substr(0, pos), text.substr(pos + 1)};
}

}  // namespace

int main(int argc, char** argv) {
  using namespace instructkit;

  CLI::App app{"Build, export and score multilingual instruction-tuning datasets."};
  app.require_subcommand(1);

  RunConfig config;
  bool quiet = false;
  std::string manifest, out_dir = "run";
  std::uint64_t seed = 0;
  std::string instruct_language = "english", strategy = "alphabetical", language_mode = "samples";
  std::string pools, backends, table, paired_table, cols = "task,alpha", format = "markdown";
  std::vector<double> ratios;
  std::vector<std::string> predictions;

  auto common = [&](CLI::App* cmd, bool needs_manifest) {
    auto* opt = cmd->add_option("--manifest", manifest, "Corpus manifest (JSON)");
    if (needs_manifest) opt->required();
    cmd->add_option("--out", out_dir, "Run directory")->capture_default_str();
    cmd->add_option("--seed", seed, "Global seed (defaults to the manifest seed)");
    cmd->add_flag("--force", config.force, "Rerun even when inputs are unchanged");
    cmd->add_flag("--quiet", quiet, "Suppress progress lines");
  };

  auto* ingest = app.add_subcommand("ingest", "Read every dataset listed in the manifest");
  common(ingest, true);

  auto* preprocess = app.add_subcommand("preprocess", "Deduplicate, unify labels, filter and split");
  common(preprocess, true);
  preprocess->add_option("--ratios", ratios, "train test dev fractions")->expected(3);
  preprocess->add_option("--dev-fraction", config.dev_fraction, "Dev share carved from train when a dataset lacks dev")
      ->capture_default_str();
  preprocess->add_option("--min-letters", config.min_letters, "Minimum letters per text")->capture_default_str();

  auto* geninstruct = app.add_subcommand("geninstruct", "Build instruction pools");
  common(geninstruct, true);
  geninstruct->add_option("--pools", pools, "Directory of ready pools (offline)");
  geninstruct->add_option("--backends", backends, "Generator backends (JSON); credentials come from the named env vars");
  geninstruct->add_option("--instruct-language", instruct_language, "english or native")->capture_default_str();
  geninstruct->add_option("-n,--per-backend", config.instructions_per_backend, "Instructions requested per backend")
      ->capture_default_str();
  geninstruct->add_option("--max-in-flight", config.max_in_flight, "Concurrent backend requests")->capture_default_str();
  geninstruct->add_option("--system-role", config.system_role, "System text stored with each pool");

  auto* assemble = app.add_subcommand("assemble", "Cap, attach instructions and order training samples");
  common(assemble, true);
  assemble->add_option("--strategy", strategy, "alphabetical, by_language, by_task or full_random")->capture_default_str();
  assemble->add_option("--language-mode", language_mode, "by_language ordering: samples or datasets")->capture_default_str();
  assemble->add_option("--cap", config.cap, "Training records kept per dataset")->capture_default_str();
  assemble->add_option("--instruct-language", instruct_language, "english or native")->capture_default_str();

  auto* export_cmd = app.add_subcommand("export", "Write trainer-facing files");
  common(export_cmd, false);
  export_cmd->add_option("--preset", config.trainer_preset, "reference-full, reference-quantized or tiny")->capture_default_str();

  auto* eval = app.add_subcommand("eval", "Score prediction files against the eval prompts");
  common(eval, true);
  eval->add_option("--predictions", predictions, "[column=]file, repeatable");

  auto* report = app.add_subcommand("report", "Render results with deltas and per-language averages");
  common(report, false);
  report->add_option("--table", table, "Render this result table (CSV) instead of eval outputs");
  report->add_option("--delta-column", config.delta_column, "Column compared against sota");
  report->add_flag("--average-per-column", config.average_per_column,
                   "Average each column over its own present cells instead of rows with a sota value");
  report->add_option("--format", format, "markdown or csv")->capture_default_str();
  report->add_option("--paired-table", paired_table, "Also run the paired test on this table");
  report->add_option("--cols", cols, "Two columns for the paired test")->capture_default_str();

  auto* stats = app.add_subcommand("stats", "Wilcoxon signed-rank test between two result columns");
  common(stats, false);
  stats->add_option("--paired-table", paired_table, "Result table (CSV)")->required();
  stats->add_option("--cols", cols, "Two columns, comma separated")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    const CLI::App* cmd = app.get_subcommands().front();
    const Command command = parse_command(cmd->get_name());
    config.manifest = manifest;
    config.out_dir = out_dir;
    if (cmd->count("--seed") > 0) config.seed = seed;
    if (!ratios.empty()) config.ratios = {ratios[0], ratios[1], ratios[2]};
    config.instruct_language = parse_instruct_language(instruct_language);
    config.pools_dir = pools;
    config.backends = backends;
    config.strategy = parse_shuffle_strategy(strategy);
    if (language_mode == "samples") {
      config.language_mode = LanguageShuffleMode::samples;
    } else if (language_mode == "datasets") {
      config.language_mode = LanguageShuffleMode::datasets;
    } else {
      throw Error(ErrorKind::ConfigError, "unknown language mode '" + language_mode + "'");
    }
    for (const auto& p : predictions) {
      auto [column, path] = split_pair(p, '=');
      config.predictions.emplace_back(column.empty() ? "model" : column, path);
    }
    config.table = table;
    config.paired_table = paired_table;
    const auto [first, second] = split_pair(cols, ',');
    if (first.empty() || second.empty()) throw Error(ErrorKind::ConfigError, "--cols expects two comma-separated names");
    config.stats_columns = {first, second};
    if (format == "markdown") {
      config.report_format = ReportFormat::markdown;
    } else if (format == "csv") {
      config.report_format = ReportFormat::csv;
    } else {
      throw Error(ErrorKind::ConfigError, "unknown report format '" + format + "'");
    }
    if (!quiet) config.log = [](std::string_view line) { std::cerr << "[instructkit] " << line << '\n'; };

    const StageResult result = run(command, config);
    std::cout << result.summary.dump(2) << '\n';
    return 0;
  } catch (const Error& e) {
    std::cerr << "instructkit: " << e.what() << '\n';
    return exit_code(category(e.kind()));
  } catch (const std::exception& e) {
    std::cerr << "instructkit: " << e.what() << '\n';
    return 4;
  }
}
