// Acceptance checks. With no arguments every criterion runs and prints one
// PASS/FAIL line; with a criterion name only that one runs and the exit
// status reflects it.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "instructkit/assemble.hpp"
#include "instructkit/error.hpp"
#include "instructkit/io.hpp"
#include "instructkit/metrics.hpp"
#include "instructkit/pipeline.hpp"
#include "instructkit/postprocess.hpp"
#include "instructkit/preprocess.hpp"
#include "instructkit/random.hpp"
#include "instructkit/report.hpp"
#include "instructkit/unicode.hpp"

using namespace instructkit;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = INSTRUCTKIT_FIXTURES_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    path_ = fs::temp_directory_path() / ("instructkit-acceptance-" + tag + "-" + std::to_string(::getpid()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

// ---------------------------------------------------------------------------

/// Scores written from the textbook definitions: per-item label membership
/// tables, no shared code with the library.
struct BruteScores {
  double accuracy, micro, macro, weighted;
  std::map<std::string, double> per_class;
};

BruteScores brute_force(const std::vector<LabelSet>& preds, const std::vector<LabelSet>& golds) {
  std::vector<std::string> classes;
  for (const auto* side : {&preds, &golds}) {
    for (const auto& s : *side) {
      for (const auto& l : s) {
        if (std::find(classes.begin(), classes.end(), l) == classes.end()) classes.push_back(l);
      }
    }
  }
  const auto contains = [](const LabelSet& s, const std::string& l) {
    for (const auto& x : s) {
      if (x == l) return true;
    }
    return false;
  };
  BruteScores out{0, 0, 0, 0, {}};
  long double match = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    bool same = true;
    for (const auto& l : classes) same = same && (contains(preds[i], l) == contains(golds[i], l));
    match += same;
  }
  out.accuracy = static_cast<double>(match / preds.size());

  long double tp_sum = 0, fp_sum = 0, fn_sum = 0, macro_sum = 0, weighted_sum = 0, support_sum = 0;
  std::size_t macro_classes = 0;
  for (const auto& l : classes) {
    long double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const bool p = contains(preds[i], l);
      const bool g = contains(golds[i], l);
      if (p && g) tp += 1;
      if (p && !g) fp += 1;
      if (!p && g) fn += 1;
    }
    const long double denom = 2 * tp + fp + fn;
    const long double f1 = denom == 0 ? 0 : 2 * tp / denom;
    out.per_class[l] = static_cast<double>(f1);
    tp_sum += tp;
    fp_sum += fp;
    fn_sum += fn;
    if (tp + fn > 0) {
      macro_sum += f1;
      ++macro_classes;
      weighted_sum += f1 * (tp + fn);
      support_sum += tp + fn;
    }
  }
  const long double micro_denom = 2 * tp_sum + fp_sum + fn_sum;
  out.micro = static_cast<double>(micro_denom == 0 ? 0 : 2 * tp_sum / micro_denom);
  out.macro = static_cast<double>(macro_classes == 0 ? 0 : macro_sum / macro_classes);
  out.weighted = static_cast<double>(support_sum == 0 ? 0 : weighted_sum / support_sum);
  return out;
}

Outcome metrics_oracle() {
  const auto start = Clock::now();
  SplitMix64 rng(20240917);
  double worst = 0.0;
  for (int instance = 0; instance < 1000; ++instance) {
    const std::size_t n_classes = 1 + rng.below(10);
    const std::size_t n_items = 1 + rng.below(200);
    const bool multi = instance % 4 == 3;
    std::vector<std::string> space;
    for (std::size_t c = 0; c < n_classes; ++c) space.push_back("c" + std::to_string(c));
    std::vector<LabelSet> preds, golds;
    for (std::size_t i = 0; i < n_items; ++i) {
      for (auto* side : {&golds, &preds}) {
        LabelSet s;
        const std::size_t k = multi ? rng.below(4) : 1;
        for (std::size_t j = 0; j < k; ++j) s.push_back(space[rng.below(n_classes)]);
        if (side == &preds && !multi && rng.below(20) == 0) s = {std::string(kUnparseableLabel)};
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
        side->push_back(s);
      }
    }
    const BruteScores want = brute_force(preds, golds);
    const std::string positive = space[rng.below(n_classes)];
    const double got[] = {
        classification_metric(MetricKind::parse("accuracy"), preds, golds, space),
        classification_metric(MetricKind::parse("micro_f1"), preds, golds, space),
        classification_metric(MetricKind::parse("macro_f1"), preds, golds, space),
        classification_metric(MetricKind::parse("weighted_f1"), preds, golds, space),
        classification_metric(MetricKind::parse("f1_positive:" + positive), preds, golds, space)};
    const auto it = want.per_class.find(positive);
    const double expect[] = {want.accuracy, want.micro, want.macro, want.weighted,
                             it == want.per_class.end() ? 0.0 : it->second};
    for (int m = 0; m < 5; ++m) worst = std::max(worst, std::abs(got[m] - expect[m]));
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-12 && elapsed < 10.0, fmt("1000 instances, max |diff| = %.3g, %.2f s", worst, elapsed)};
}

Outcome rouge2_hand_case() {
  const RougeScore s = rouge2("the cat sat on the mat", "the cat sat");
  const bool exact_counts = s.overlap == 2 && s.candidate_bigrams == 5 && s.reference_bigrams == 2;
  const double diff = std::abs(s.f1 - 4.0 / 7.0);
  return {exact_counts && diff <= 1e-12,
          "overlap " + std::to_string(s.overlap) + " of " + std::to_string(s.candidate_bigrams) + "+" +
              std::to_string(s.reference_bigrams) + " bigrams, " + fmt("f1 = %.15f (|f1 - 4/7| = %.3g)", s.f1, diff)};
}

Outcome wilcoxon_ablation() {
  const auto start = Clock::now();
  const ResultTable table = load_result_table(kFixtures / "ablation_reference.csv");
  const auto a = table.column("task");
  const auto b = table.column("alpha");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] && b[i]) {
      x.push_back(*a[i]);
      y.push_back(*b[i]);
    }
  }
  const WilcoxonResult w = wilcoxon_signed_rank(x, y);
  const double elapsed = seconds_since(start);
  const bool pass = x.size() == 52 && w.p_value < 0.05 && w.p_value >= 0.015 && w.p_value <= 0.035 && elapsed < 1.0;
  return {pass, std::to_string(x.size()) + " pairs, n_eff " + std::to_string(w.n_effective) + ", " +
                    std::string(to_string(w.method)) + fmt(", W = %.1f, p = %.4f, %.3f s", w.statistic, w.p_value, elapsed)};
}

Outcome reference_averages() {
  const ResultTable table = load_result_table(kFixtures / "results_reference.csv");
  const std::map<std::string, std::vector<double>> printed = {
      {"arabic", {0.773, 0.540, 0.733, 0.735, -0.038}},
      {"english", {0.773, 0.528, 0.731, 0.747, -0.026}},
      {"hindi", {0.613, 0.477, 0.673, 0.656, 0.043}}};
  const std::vector<std::string> columns = {"sota", "base", "model_native", "model_english", "delta"};
  const auto averages = aggregate_averages(table, {"sota"});
  double worst = 0.0;
  std::string worst_cell;
  std::size_t checked = 0;
  for (const auto& g : averages) {
    const auto& want = printed.at(g.language);
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const auto& avg = g.columns.at(columns[c]);
      const double diff = avg ? std::abs(avg->mean - want[c]) : 1.0;
      ++checked;
      if (diff > worst) {
        worst = diff;
        worst_cell = g.language + "/" + columns[c];
      }
    }
  }
  return {checked == 15 && worst <= 0.005 + 1e-9,
          std::to_string(checked) + " averages, max |diff| = " + fmt("%.4f", worst) + " at " + worst_cell};
}

Outcome reference_delta() {
  ResultTable table = load_result_table(kFixtures / "results_reference.csv");
  const auto printed = table.column("delta");
  compute_delta(table, "model_english", "sota", "recomputed");
  const auto recomputed = table.column("recomputed");
  std::size_t checked = 0;
  std::vector<std::string> off;
  for (std::size_t i = 0; i < printed.size(); ++i) {
    if (printed[i].has_value() != recomputed[i].has_value()) {
      off.push_back(table.rows()[i].key() + " (missing mismatch)");
      continue;
    }
    if (!printed[i]) continue;
    ++checked;
    if (std::abs(*printed[i] - *recomputed[i]) > 0.001 + 1e-9) {
      off.push_back(table.rows()[i].key() + fmt(" printed %.3f recomputed %.3f", *printed[i], *recomputed[i]));
    }
  }
  const auto* ct = table.find("english", "CT24_T1");
  const bool anchor = ct && ct->score("recomputed") && std::abs(*ct->score("recomputed") - 0.189) <= 0.001 + 1e-9;
  std::string detail = std::to_string(checked) + " deltas, " + std::to_string(off.size()) + " outside 0.001";
  for (const auto& o : off) detail += "; " + o;
  if (!anchor) detail += "; english/CT24_T1 anchor off";
  return {off.empty() && anchor, detail};
}

Outcome split_properties() {
  SplitMix64 rng(500);
  std::size_t violations = 0;
  for (int dataset = 0; dataset < 500; ++dataset) {
    const std::size_t n = 1 + rng.below(300);
    const std::size_t n_labels = 1 + rng.below(6);
    std::vector<Record> records;
    std::map<std::string, std::size_t> stratum_sizes;
    for (std::size_t i = 0; i < n; ++i) {
      Record r;
      r.ordinal = i;
      r.record_id = make_record_id("synthetic", i);
      r.text = "row " + std::to_string(i);
      r.labels = {"l" + std::to_string(rng.below(n_labels))};
      ++stratum_sizes[stratum_key(r)];
      records.push_back(std::move(r));
    }
    double w_train = static_cast<double>(1 + rng.below(20));
    double w_test = static_cast<double>(rng.below(10));
    double w_dev = static_cast<double>(rng.below(10));
    const double total = w_train + w_test + w_dev;
    const SplitRatios ratios{w_train / total, w_test / total, w_dev / total};
    const std::uint64_t seed = rng.next();

    const SplitResult s = stratified_split(records, ratios, seed, "synthetic");
    const SplitResult again = stratified_split(records, ratios, seed, "synthetic");
    if (!(s.train == again.train && s.test == again.test && s.dev == again.dev)) ++violations;

    std::set<std::string> seen;
    std::size_t assigned = 0;
    std::map<std::string, std::array<std::size_t, 3>> counts;
    const std::vector<Record>* parts[] = {&s.train, &s.test, &s.dev};
    for (std::size_t p = 0; p < 3; ++p) {
      for (const auto& r : *parts[p]) {
        ++assigned;
        if (!seen.insert(r.record_id).second) ++violations;
        ++counts[stratum_key(r)][p];
      }
    }
    if (assigned != n || seen.size() != n) ++violations;
    const double shares[] = {ratios.train, ratios.test, ratios.dev};
    for (const auto& [key, size] : stratum_sizes) {
      for (std::size_t p = 0; p < 3; ++p) {
        const double target = shares[p] * static_cast<double>(size);
        if (std::abs(static_cast<double>(counts[key][p]) - target) >= 1.0) ++violations;
      }
    }
  }
  return {violations == 0, "500 datasets, " + std::to_string(violations) + " violations"};
}

Outcome sampling_cap() {
  SplitMix64 rng(7);
  std::size_t violations = 0;
  std::string detail;
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n = 20001 + rng.below(30000);
    std::vector<Record> records;
    std::map<std::string, std::size_t> before;
    const std::size_t n_labels = 2 + rng.below(5);
    for (std::size_t i = 0; i < n; ++i) {
      Record r;
      r.ordinal = i;
      r.record_id = make_record_id("big", i);
      r.text = "row";
      r.labels = {"l" + std::to_string(std::min<std::size_t>(rng.below(n_labels * 2), n_labels - 1))};
      ++before[stratum_key(r)];
      records.push_back(std::move(r));
    }
    const auto capped = sample_training(records, kDefaultTrainingCap, rng.next(), "big");
    if (capped.size() != kDefaultTrainingCap) ++violations;
    std::map<std::string, std::size_t> after;
    for (const auto& r : capped) ++after[stratum_key(r)];
    for (const auto& [key, count] : before) {
      const double target = static_cast<double>(kDefaultTrainingCap) * static_cast<double>(count) / static_cast<double>(n);
      if (std::abs(static_cast<double>(after[key]) - target) >= 1.0) ++violations;
    }
    if (trial == 0) detail = std::to_string(n) + " -> " + std::to_string(capped.size());
  }
  std::vector<Record> small;
  for (std::size_t i = 0; i < 20000; ++i) {
    Record r;
    r.ordinal = i;
    r.record_id = make_record_id("small", i);
    r.labels = {i % 3 ? "a" : "b"};
    small.push_back(std::move(r));
  }
  const bool identity = sample_training(small, kDefaultTrainingCap, 1, "small") == small;
  if (!identity) ++violations;
  return {violations == 0, detail + ", 5 oversized datasets, cap-sized identity " + (identity ? "holds" : "broken") +
                               ", " + std::to_string(violations) + " violations"};
}

SamplesByDataset shuffle_fixture() {
  SamplesByDataset out;
  const char* languages[] = {"hindi", "english", "arabic"};
  const char* tasks[] = {"Sentiment", "Claim", "Factuality"};
  for (const char* lang : languages) {
    for (const char* task : tasks) {
      DatasetMeta meta;
      meta.id = std::string(lang) + "_" + task;
      meta.name = meta.id;
      meta.language = Language::parse(lang);
      meta.task = task;
      meta.task_definition = "Label the text.";
      meta.label_space = {"x", "y"};
      InstructionPool pool;
      pool.dataset_id = meta.id;
      for (int i = 0; i < 20; ++i) pool.instructions.push_back(with_suffix("Instruction " + std::to_string(i), meta.task_kind));
      pool.backend_tags.assign(20, "a");
      std::vector<Record> records;
      for (std::size_t i = 0; i < 40; ++i) {
        Record r;
        r.ordinal = i;
        r.record_id = make_record_id(meta.id, i);
        r.text = "text " + std::to_string(i);
        r.labels = {i % 2 ? "x" : "y"};
        records.push_back(std::move(r));
      }
      out[meta.id] = attach_instructions(records, pool, meta, 3);
    }
  }
  return out;
}

Outcome shuffle_invariants() {
  const SamplesByDataset samples = shuffle_fixture();
  std::multiset<std::string> reference;
  for (const auto& [_, list] : samples) {
    for (const auto& s : list) reference.insert(sample_to_json(s).dump());
  }
  ScratchDir scratch("shuffle");
  std::vector<std::string> failures;
  for (auto strategy : {ShuffleStrategy::alphabetical, ShuffleStrategy::by_language, ShuffleStrategy::by_task,
                        ShuffleStrategy::full_random}) {
    const std::string name(to_string(strategy));
    const auto out = shuffle(samples, strategy, 99);
    std::multiset<std::string> got;
    for (const auto& s : out) got.insert(sample_to_json(s).dump());
    if (got != reference) failures.push_back(name + " not a permutation");

    if (strategy == ShuffleStrategy::by_language) {
      for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i].language < out[i - 1].language) {
          failures.push_back("by_language not language-monotone");
          break;
        }
      }
    }
    if (strategy == ShuffleStrategy::by_task) {
      for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i].task < out[i - 1].task) {
          failures.push_back("by_task not task-monotone");
          break;
        }
      }
    }
    const auto first = export_training(out, scratch.path() / (name + ".1.jsonl"), strategy, 99);
    const auto second = export_training(shuffle(samples, strategy, 99), scratch.path() / (name + ".2.jsonl"), strategy, 99);
    if (first.sha256 != second.sha256) failures.push_back(name + " checksum differs across runs");
  }
  std::string detail = "4 strategies over " + std::to_string(reference.size()) + " samples";
  for (const auto& f : failures) detail += "; " + f;
  return {failures.empty(), detail};
}

Outcome instruction_uniformity() {
  DatasetMeta meta;
  meta.id = "uniform";
  meta.label_space = {"x"};
  InstructionPool pool;
  pool.dataset_id = meta.id;
  for (int i = 0; i < 20; ++i) pool.instructions.push_back("Instruction " + std::to_string(i));
  pool.backend_tags.assign(20, "a");
  std::vector<Record> records(20000);
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i].ordinal = i;
    records[i].record_id = make_record_id(meta.id, i);
    records[i].labels = {"x"};
  }
  std::vector<double> counts(20, 0.0);
  for (const auto& s : attach_instructions(records, pool, meta, 42)) counts[s.instruction_index] += 1.0;
  const double expected = 1000.0;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // Upper 0.001 quantile of chi-square with 19 degrees of freedom.
  const double critical = 43.8202;
  const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  return {chi2 < critical, fmt("chi2 = %.2f (df 19, critical %.2f), counts in [%.0f, ", chi2, critical, *lo) +
                               fmt("%.0f]", *hi)};
}

std::string random_unicode(SplitMix64& rng) {
  static const std::pair<char32_t, char32_t> ranges[] = {
      {0x20, 0x7E},     {0x09, 0x0D},     {0xA0, 0x17F},    {0x300, 0x36F},   {0x600, 0x6FF},
      {0x900, 0x97F},   {0x4E00, 0x4E80}, {0x1F600, 0x1F64F}, {0x2000, 0x206F}, {0xFB50, 0xFDFF}};
  std::u32string s;
  const std::size_t len = rng.below(40);
  for (std::size_t i = 0; i < len; ++i) {
    const auto& [lo, hi] = ranges[rng.below(std::size(ranges))];
    s.push_back(static_cast<char32_t>(lo + rng.below(hi - lo + 1)));
  }
  return unicode::encode(s);
}

Outcome postprocess_fixtures() {
  std::vector<std::string> failures;
  if (normalize_output("فactual") != "factual") failures.push_back("فactual -> " + normalize_output("فactual"));
  if (normalize_output("سارcastic") != "sarcastic") failures.push_back("سارcastic -> " + normalize_output("سارcastic"));
  const auto factual = extract_label("فactual", {"factual", "not_factual"});
  if (factual.labels != LabelSet{"factual"}) failures.push_back("فactual not extracted as factual");
  const auto sarcastic = extract_label("سارcastic", {"sarcastic", "not_sarcastic"});
  if (sarcastic.labels != LabelSet{"sarcastic"}) failures.push_back("سارcastic not extracted as sarcastic");
  const auto refusal = extract_label("I cannot provide a label", {"positive", "negative", "neutral"});
  if (refusal.status != ExtractionResult::Status::unparseable) failures.push_back("refusal was parsed");

  SplitMix64 rng(1000);
  std::size_t not_idempotent = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::string once = normalize_output(random_unicode(rng));
    if (normalize_output(once) != once) ++not_idempotent;
  }
  if (not_idempotent) failures.push_back(std::to_string(not_idempotent) + " strings not idempotent");
  std::string detail = "3 fixtures, 1000 random strings";
  for (const auto& f : failures) detail += "; " + f;
  return {failures.empty(), detail};
}

Outcome end_to_end() {
  const auto start = Clock::now();
  ScratchDir scratch("e2e");
  RunConfig config;
  config.manifest = kFixtures / "corpus" / "manifest.json";
  config.out_dir = scratch.path() / "run";
  config.pools_dir = kFixtures / "corpus" / "pools";
  config.strategy = ShuffleStrategy::by_task;
  config.predictions = {{"model_english", kFixtures / "corpus" / "predictions.jsonl"}};
  std::size_t records = 0;
  for (Command c : {Command::ingest, Command::preprocess, Command::geninstruct, Command::assemble, Command::export_,
                    Command::eval, Command::report}) {
    const StageResult r = run(c, config);
    if (c == Command::ingest) records = r.summary.value("records", std::size_t{0});
  }
  const std::string report = io::read_file(config.out_dir / "report" / "report.md");
  const bool has_delta = report.find("Δ") != std::string::npos;
  const bool has_average = report.find("**Average**") != std::string::npos;
  std::size_t sections = 0;
  for (const char* lang : {"## arabic", "## english", "## hindi"}) sections += report.find(lang) != std::string::npos;
  const auto train = read_training_file(config.out_dir / "export" / "train.jsonl");
  bool task_monotone = true;
  for (std::size_t i = 1; i < train.size(); ++i) task_monotone = task_monotone && !(train[i].task < train[i - 1].task);
  const double elapsed = seconds_since(start);
  const bool pass = has_delta && has_average && sections == 3 && task_monotone && !train.empty() && elapsed < 30.0;
  return {pass, std::to_string(records) + " records ingested, " + std::to_string(train.size()) + " training samples, " +
                    std::to_string(sections) + " language sections, delta " + (has_delta ? "present" : "absent") +
                    ", averages " + (has_average ? "present" : "absent") + fmt(", %.2f s", elapsed)};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> all = {
      {"metrics_oracle", metrics_oracle},
      {"rouge2_hand_case", rouge2_hand_case},
      {"wilcoxon_ablation", wilcoxon_ablation},
      {"reference_averages", reference_averages},
      {"reference_delta", reference_delta},
      {"split_properties", split_properties},
      {"sampling_cap", sampling_cap},
      {"shuffle_invariants", shuffle_invariants},
      {"instruction_uniformity", instruction_uniformity},
      {"postprocess_fixtures", postprocess_fixtures},
      {"end_to_end", end_to_end},
  };
  return all;
}

bool run_one(const std::string& name, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("threw: ") + e.what()};
  }
  std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
  std::fflush(stdout);
  return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 2) {
    std::fprintf(stderr, "usage: %s [criterion]\n", argv[0]);
    return 2;
  }
  if (argc == 2) {
    for (const auto& [name, check] : criteria()) {
      if (name == argv[1]) return run_one(name, check) ? 0 : 1;
    }
    std::fprintf(stderr, "unknown criterion '%s'\n", argv[1]);
    return 2;
  }
  bool all_pass = true;
  for (const auto& [name, check] : criteria()) all_pass = run_one(name, check) && all_pass;
  return all_pass ? 0 : 1;
}
