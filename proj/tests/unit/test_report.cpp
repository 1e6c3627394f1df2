#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "instructkit/error.hpp"
#include "instructkit/random.hpp"
#include "instructkit/report.hpp"

using namespace instructkit;

namespace {

const char* kSmall =
    "language,dataset,task,sota,base,model_english\n"
    "arabic,A1,Sentiment,0.753,0.5,0.942\n"
    "arabic,A2,Claim,--,0.4,0.6\n"
    "english,E1,Sentiment,0.8,0.7,0.9\n"
    "english,E2,Claim,0.6,,0.5\n";

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

TEST_CASE("tables parse with attribute detection and missing cells") {
  const ResultTable t = parse_result_table(kSmall);
  CHECK(t.attribute_columns() == std::vector<std::string>{"task"});
  CHECK(t.score_columns() == std::vector<std::string>{"sota", "base", "model_english"});
  REQUIRE(t.rows().size() == 4);
  CHECK_FALSE(t.find("arabic", "A2")->score("sota").has_value());
  CHECK_FALSE(t.find("english", "E2")->score("base").has_value());
  CHECK(t.find("english", "E1")->attributes.at("task") == "Sentiment");
  CHECK(t.find("hindi", "E1") == nullptr);

  CHECK(kind_of([] { parse_result_table("language,dataset,x\narabic,A,1\narabic,A,2\n"); }) == ErrorKind::DuplicateDatasetId);
  CHECK(kind_of([] { parse_result_table("dataset,x\nA,1\n"); }) == ErrorKind::UnknownColumn);
  try {
    parse_result_table("language,dataset,x\narabic,A,1\narabic,B,2\n", std::vector<std::string>{});
    parse_result_table("language,dataset,x\narabic,A,1\narabic,B,1.2.3\n", std::vector<std::string>{});
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("delta hand case and antisymmetry") {
  ResultTable t = parse_result_table(kSmall);
  compute_delta(t, "model_english", "sota");
  CHECK(*t.find("arabic", "A1")->score("delta") == doctest::Approx(0.189));
  CHECK_FALSE(t.find("arabic", "A2")->score("delta").has_value());
  compute_delta(t, "sota", "model_english", "reverse");
  for (const auto& row : t.rows()) {
    const auto d = row.score("delta");
    const auto r = row.score("reverse");
    CHECK(d.has_value() == r.has_value());
    if (d) CHECK(*d == -*r);
  }
  CHECK(kind_of([&] { compute_delta(t, "nope", "sota"); }) == ErrorKind::UnknownColumn);
  CHECK(kind_of([&] { compute_delta(t, "sota", "base", "task"); }) == ErrorKind::UnknownColumn);
}

TEST_CASE("averages per language") {
  const ResultTable t = parse_result_table(kSmall);
  const auto per_column = aggregate_averages(t);
  REQUIRE(per_column.size() == 2);
  CHECK(per_column[0].language == "arabic");
  CHECK(per_column[0].rows == 2);
  CHECK(per_column[0].columns.at("sota")->mean == doctest::Approx(0.753));
  CHECK(per_column[0].columns.at("sota")->count == 1);
  CHECK(per_column[0].columns.at("model_english")->mean == doctest::Approx(0.771));
  CHECK(per_column[1].columns.at("base")->count == 1);

  const auto dropped = aggregate_averages(t, {"sota"});
  CHECK(dropped[0].rows == 1);
  CHECK(dropped[0].columns.at("model_english")->mean == doctest::Approx(0.942));
  CHECK(dropped[1].columns.at("base")->mean == doctest::Approx(0.7));

  CHECK(kind_of([] { aggregate_averages(ResultTable({}, {"x"})); }) == ErrorKind::EmptyInput);
  CHECK(kind_of([&] { aggregate_averages(t, {"nope"}); }) == ErrorKind::UnknownColumn);
}

TEST_CASE("averages ignore row order within a language") {
  const ResultTable a = parse_result_table(kSmall);
  const ResultTable b = parse_result_table(
      "language,dataset,task,sota,base,model_english\n"
      "english,E2,Claim,0.6,,0.5\n"
      "arabic,A2,Claim,--,0.4,0.6\n"
      "english,E1,Sentiment,0.8,0.7,0.9\n"
      "arabic,A1,Sentiment,0.753,0.5,0.942\n");
  const auto avg_a = aggregate_averages(a);
  const auto avg_b = aggregate_averages(b);
  for (const auto& ga : avg_a) {
    const auto gb = std::find_if(avg_b.begin(), avg_b.end(), [&](const GroupAverages& g) { return g.language == ga.language; });
    REQUIRE(gb != avg_b.end());
    for (const auto& [col, v] : ga.columns) {
      CHECK(v.has_value() == gb->columns.at(col).has_value());
      if (v) CHECK(v->mean == doctest::Approx(gb->columns.at(col)->mean));
    }
  }
}

TEST_CASE("wilcoxon hand cases") {
  const auto r = wilcoxon_signed_rank({1, 2, 3}, {0, 0, 0});
  CHECK(r.n_effective == 3);
  CHECK(r.statistic == 0.0);
  CHECK(r.t_plus == 6.0);
  CHECK(r.p_value == doctest::Approx(0.25));
  CHECK(r.method == WilcoxonResult::Method::exact);

  const auto tied = wilcoxon_signed_rank({1, 1, 2, 5, 3}, {0, 2, 1, 5, 0});
  CHECK(tied.n_effective == 4);
  CHECK(tied.t_minus == doctest::Approx(2.0));
  CHECK(tied.t_plus == doctest::Approx(8.0));

  CHECK(kind_of([] { wilcoxon_signed_rank({1, 2}, {0, 0}); }) == ErrorKind::EmptyInput);
  CHECK(kind_of([] { wilcoxon_signed_rank({1, 2, 3}, {0, 0}); }) == ErrorKind::LengthMismatch);
  CHECK(kind_of([] { wilcoxon_signed_rank({1, 2, 3}, {1, 2, 3}); }) == ErrorKind::AllZeroDifferences);
}

TEST_CASE("exact distribution matches brute-force enumeration") {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 3 + rng.below(10);
    std::vector<double> ranks;
    for (std::size_t i = 1; i <= n; ++i) ranks.push_back(static_cast<double>(i));
    if (trial % 2) {
      ranks[1] = ranks[2] = 2.5;
    }
    double total = 0;
    for (double r : ranks) total += r;
    const double t_plus = std::round(rng.below(static_cast<std::uint64_t>(total) + 1) * 2.0) / 2.0;
    std::size_t extreme = 0;
    const double centre = total / 2.0;
    for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
      double s = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask >> i & 1) s += ranks[i];
      }
      if (std::abs(s - centre) >= std::abs(t_plus - centre) - 1e-9) ++extreme;
    }
    const double want = std::min(1.0, static_cast<double>(extreme) / static_cast<double>(1ULL << n));
    CHECK(wilcoxon_exact_p(ranks, t_plus) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("wilcoxon properties") {
  SplitMix64 rng(404);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + rng.below(40);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<double>(rng.below(1000)) / 1000.0;
      b[i] = static_cast<double>(rng.below(1000)) / 1000.0;
    }
    if (a == b) continue;
    const auto r = wilcoxon_signed_rank(a, b);
    CHECK(r.p_value >= 0.0);
    CHECK(r.p_value <= 1.0);
    CHECK(r.t_plus + r.t_minus == doctest::Approx(r.n_effective * (r.n_effective + 1) / 2.0));
    CHECK(r.statistic == std::min(r.t_plus, r.t_minus));

    const auto swapped = wilcoxon_signed_rank(b, a);
    CHECK(swapped.p_value == doctest::Approx(r.p_value));
    CHECK(swapped.t_plus == doctest::Approx(r.t_minus));

    std::vector<double> a2(a), b2(b);
    for (std::size_t i = 0; i < n; ++i) {
      a2[i] = a[i] * 3.0 + 1.0;
      b2[i] = b[i] * 3.0 + 1.0;
    }
    CHECK(wilcoxon_signed_rank(a2, b2).p_value == doctest::Approx(r.p_value));

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    fisher_yates(perm, rng);
    std::vector<double> pa, pb;
    for (std::size_t i : perm) {
      pa.push_back(a[i]);
      pb.push_back(b[i]);
    }
    CHECK(wilcoxon_signed_rank(pa, pb).p_value == doctest::Approx(r.p_value));
    CHECK(r.method == (r.n_effective <= kWilcoxonExactMax ? WilcoxonResult::Method::exact
                                                            : WilcoxonResult::Method::normal_approx));
  }
}

TEST_CASE("normal approximation tracks the exact p-value") {
  for (std::size_t n = 10; n <= 25; ++n) {
    std::vector<double> ranks;
    for (std::size_t i = 1; i <= n; ++i) ranks.push_back(static_cast<double>(i));
    const double total = n * (n + 1) / 2.0;
    for (double frac : {0.1, 0.2, 0.3, 0.4}) {
      const double t = std::round(total * frac);
      CHECK(std::abs(wilcoxon_exact_p(ranks, t) - wilcoxon_normal_p(ranks, t)) < 0.02);
    }
  }
}

TEST_CASE("relative improvement reports both aggregations") {
  const ResultTable t = parse_result_table(
      "language,dataset,base,model\n"
      "arabic,A,0.5,0.75\n"
      "arabic,B,0.25,0.5\n"
      "english,C,0.5,0.5\n");
  const auto imp = relative_improvement(t, "model", "base");
  REQUIRE(imp.size() == 3);
  CHECK(imp[0].scope == "all");
  CHECK(imp[0].rows == 3);
  CHECK(imp[0].mean_of_ratios == doctest::Approx((0.5 + 1.0 + 0.0) / 3.0));
  CHECK(imp[0].ratio_of_means == doctest::Approx((1.75 / 3 - 1.25 / 3) / (1.25 / 3)));
  CHECK(imp[1].scope == "arabic");
  CHECK(imp[1].mean_of_ratios == doctest::Approx(0.75));
  CHECK(imp[2].mean_of_ratios == doctest::Approx(0.0));
}

TEST_CASE("rendering is deterministic and CSV round-trips") {
  ResultTable t = parse_result_table(kSmall);
  compute_delta(t, "model_english", "sota");
  ReportContent content;
  content.table = t;
  content.averages = aggregate_averages(t, {"sota"});
  const std::string md = render_markdown(content);
  CHECK(md == render_markdown(content));
  CHECK(md.find("| A2 |") != std::string::npos);
  CHECK(md.find("--") != std::string::npos);
  CHECK(md.find("0.189") != std::string::npos);
  CHECK(md.find("**Average**") != std::string::npos);
  CHECK(md.find("Model (English)") != std::string::npos);

  const std::string csv = render_csv(t);
  CHECK(parse_result_table(csv, t.attribute_columns()) == t);
  CHECK(render_csv(parse_result_table(csv, t.attribute_columns())) == csv);

  testing::TempDir dir;
  render_report(content, ReportFormat::csv, dir / "r.csv");
  CHECK(io::read_file(dir / "r.csv") == csv);
  CHECK(load_result_table(dir / "r.csv", t.attribute_columns()) == t);

  CHECK(column_heading("sota") == "SOTA");
  CHECK(column_heading("model_native") == "Model (native)");
  CHECK(column_heading("custom") == "custom");
}
