#pragma once

// Result tables, per-language averages, paired significance testing and
// report rendering.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace instructkit {

struct ResultRow {
  std::string language;
  std::string dataset;
  std::map<std::string, std::string> attributes;  // task, metric, ...
  std::map<std::string, std::optional<double>> scores;

  std::string key() const { return language + "/" + dataset; }
  std::optional<double> score(const std::string& column) const;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

/// Rows keyed by language/dataset with a declared set of text attribute
/// columns and numeric score columns. A missing score is nullopt ("--").
class ResultTable {
 public:
  ResultTable() = default;
  ResultTable(std::vector<std::string> attribute_columns, std::vector<std::string> score_columns);

  const std::vector<std::string>& attribute_columns() const noexcept { return attribute_columns_; }
  const std::vector<std::string>& score_columns() const noexcept { return score_columns_; }
  const std::vector<ResultRow>& rows() const noexcept { return rows_; }

  bool has_column(const std::string& name) const;
  /// Throws Error(DuplicateDatasetId) when the key is already present.
  void add_row(ResultRow row);
  const ResultRow* find(const std::string& language, const std::string& dataset) const;
  /// Sets (or adds) a score column. Throws Error(UnknownColumn) if `name`
  /// is an attribute column.
  void set_column(const std::string& name, const std::vector<std::optional<double>>& values);
  std::vector<std::optional<double>> column(const std::string& name) const;

  friend bool operator==(const ResultTable&, const ResultTable&) = default;

 private:
  std::vector<std::string> attribute_columns_;
  std::vector<std::string> score_columns_;
  std::vector<ResultRow> rows_;
};

/// Reads a CSV table. "language" and "dataset" are required. Other columns
/// are scores when every non-missing cell parses as a number, attributes
/// otherwise, unless `attribute_columns` names them explicitly. "--" and
/// empty cells are missing. Throws MissingFile, ParseError, UnknownColumn.
ResultTable load_result_table(const std::filesystem::path& path,
                              const std::optional<std::vector<std::string>>& attribute_columns = std::nullopt);
ResultTable parse_result_table(std::string_view csv_text,
                               const std::optional<std::vector<std::string>>& attribute_columns = std::nullopt);

/// Adds `out_column` = col_a - col_b, missing when either operand is.
void compute_delta(ResultTable& table, const std::string& col_a, const std::string& col_b,
                   const std::string& out_column = "delta");

struct ColumnAverage {
  double mean = 0.0;
  std::size_t count = 0;
};

struct GroupAverages {
  std::string language;
  std::size_t rows = 0;
  std::map<std::string, std::optional<ColumnAverage>> columns;
};

struct AverageOptions {
  /// When set, rows where this column is missing are left out of every
  /// column's average (the reference layout); otherwise each column skips
  /// its own missing cells.
  std::optional<std::string> require_column;
};

/// Column means per language, groups in first-appearance order.
/// Throws EmptyInput for an empty table, UnknownColumn for a bad option.
std::vector<GroupAverages> aggregate_averages(const ResultTable& table, const AverageOptions& options = {});

struct WilcoxonResult {
  enum class Method { exact, normal_approx };

  std::size_t n_effective = 0;
  double statistic = 0.0;  // W = min(T+, T-)
  double t_plus = 0.0;
  double t_minus = 0.0;
  double p_value = 1.0;
  Method method = Method::exact;

  nlohmann::json to_json() const;
};

std::string_view to_string(WilcoxonResult::Method method);

/// Largest n_effective handled by exact enumeration.
inline constexpr std::size_t kWilcoxonExactMax = 25;

/// Two-sided signed-rank test on paired samples. Zero differences are
/// dropped; tied magnitudes share their average rank. Exact null
/// distribution up to kWilcoxonExactMax pairs, otherwise the normal
/// approximation with tie-corrected variance and continuity correction.
/// Throws LengthMismatch, EmptyInput (fewer than 3 pairs), AllZeroDifferences.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b);

/// Both approximations, for cross-checking.
double wilcoxon_exact_p(const std::vector<double>& ranks, double t_plus);
double wilcoxon_normal_p(const std::vector<double>& ranks, double t_plus);

/// Relative gain of `model` over `baseline` across rows with both values.
struct RelativeImprovement {
  std::string scope;  // "all" or a language
  std::size_t rows = 0;
  double mean_of_ratios = 0.0;  // mean over rows of (model - base) / base
  double ratio_of_means = 0.0;  // (mean model - mean base) / mean base
};

std::vector<RelativeImprovement> relative_improvement(const ResultTable& table, const std::string& model,
                                                      const std::string& baseline);

struct ReportStats {
  std::string label;  // e.g. "task vs alpha"
  WilcoxonResult result;
};

struct ReportContent {
  ResultTable table;
  std::vector<std::string> columns;  // score columns to show; empty shows all
  std::vector<GroupAverages> averages;
  std::vector<ReportStats> stats;
  std::vector<RelativeImprovement> improvements;
  std::string improvement_label;
};

enum class ReportFormat { markdown, csv };

/// Markdown: one section per language with its rows, then an Average row.
/// Scores print with three decimals, missing as "--".
std::string render_markdown(const ReportContent& content);
/// Lossless CSV of the table (shortest round-trip number formatting).
std::string render_csv(const ResultTable& table);
void render_report(const ReportContent& content, ReportFormat format, const std::filesystem::path& path);

/// Display heading for a column name ("model_native" -> "Model (native)").
std::string column_heading(const std::string& name);

}  // namespace instructkit
