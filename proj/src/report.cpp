#include "instructkit/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "instructkit/error.hpp"
#include "instructkit/io.hpp"

namespace instructkit {

using io::json;

std::optional<double> ResultRow::score(const std::string& column) const {
  const auto it = scores.find(column);
  return it == scores.end() ? std::nullopt : it->second;
}

ResultTable::ResultTable(std::vector<std::string> attribute_columns, std::vector<std::string> score_columns)
    : attribute_columns_(std::move(attribute_columns)), score_columns_(std::move(score_columns)) {}

bool ResultTable::has_column(const std::string& name) const {
  return std::find(score_columns_.begin(), score_columns_.end(), name) != score_columns_.end();
}

void ResultTable::add_row(ResultRow row) {
  if (find(row.language, row.dataset)) throw Error(ErrorKind::DuplicateDatasetId, row.key());
  for (const auto& c : score_columns_) row.scores.try_emplace(c, std::nullopt);
  rows_.push_back(std::move(row));
}

const ResultRow* ResultTable::find(const std::string& language, const std::string& dataset) const {
  for (const auto& r : rows_) {
    if (r.language == language && r.dataset == dataset) return &r;
  }
  return nullptr;
}

void ResultTable::set_column(const std::string& name, const std::vector<std::optional<double>>& values) {
  if (std::find(attribute_columns_.begin(), attribute_columns_.end(), name) != attribute_columns_.end()) {
    throw Error(ErrorKind::UnknownColumn, name + " is an attribute column");
  }
  if (values.size() != rows_.size()) {
    throw Error(ErrorKind::LengthMismatch, name + ": " + std::to_string(values.size()) + " values for " +
                                               std::to_string(rows_.size()) + " rows");
  }
  if (!has_column(name)) score_columns_.push_back(name);
  for (std::size_t i = 0; i < rows_.size(); ++i) rows_[i].scores[name] = values[i];
}

std::vector<std::optional<double>> ResultTable::column(const std::string& name) const {
  if (!has_column(name)) throw Error(ErrorKind::UnknownColumn, name);
  std::vector<std::optional<double>> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.push_back(r.score(name));
  return out;
}

namespace {

bool is_missing(const std::string& cell) { return cell.empty() || cell == "--"; }

std::optional<double> parse_number(const std::string& cell) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::string format_shortest(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ec == std::errc() ? ptr : buf);
}

std::string format_fixed3(double value) {
  char buf[64];
  if (std::fabs(value) < 0.0005) value = 0.0;
  std::snprintf(buf, sizeof buf, "%.3f", value);
  return buf;
}

}  // namespace

ResultTable parse_result_table(std::string_view csv_text, const std::optional<std::vector<std::string>>& attribute_columns) {
  const io::Table raw = io::parse_delimited(csv_text, ',');
  const std::size_t lang_col = raw.column("language");
  const std::size_t dataset_col = raw.column("dataset");

  std::vector<std::string> attrs;
  std::vector<std::string> scores;
  std::vector<bool> is_attr(raw.header.size(), false);
  for (std::size_t c = 0; c < raw.header.size(); ++c) {
    if (c == lang_col || c == dataset_col) continue;
    bool attr = false;
    if (attribute_columns) {
      attr = std::find(attribute_columns->begin(), attribute_columns->end(), raw.header[c]) != attribute_columns->end();
    } else {
      for (const auto& row : raw.rows) {
        if (!is_missing(row[c]) && !parse_number(row[c])) {
          attr = true;
          break;
        }
      }
    }
    is_attr[c] = attr;
    (attr ? attrs : scores).push_back(raw.header[c]);
  }
  if (attribute_columns) {
    for (const auto& name : *attribute_columns) raw.column(name);
  }

  ResultTable table(attrs, scores);
  for (std::size_t i = 0; i < raw.rows.size(); ++i) {
    const auto& cells = raw.rows[i];
    ResultRow row;
    row.language = cells[lang_col];
    row.dataset = cells[dataset_col];
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == lang_col || c == dataset_col) continue;
      if (is_attr[c]) {
        row.attributes[raw.header[c]] = cells[c];
      } else if (is_missing(cells[c])) {
        row.scores[raw.header[c]] = std::nullopt;
      } else if (auto v = parse_number(cells[c])) {
        row.scores[raw.header[c]] = *v;
      } else {
        throw Error(ErrorKind::ParseError, "line " + std::to_string(raw.lines[i]) + ": '" + cells[c] + "' in column " +
                                               raw.header[c] + " is not a number");
      }
    }
    table.add_row(std::move(row));
  }
  return table;
}

ResultTable load_result_table(const std::filesystem::path& path, const std::optional<std::vector<std::string>>& attribute_columns) {
  try {
    return parse_result_table(io::read_file(path), attribute_columns);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ParseError || e.kind() == ErrorKind::DuplicateDatasetId) {
      throw Error(e.kind(), path.string() + ": " + e.detail());
    }
    throw;
  }
}

void compute_delta(ResultTable& table, const std::string& col_a, const std::string& col_b, const std::string& out_column) {
  const auto a = table.column(col_a);
  const auto b = table.column(col_b);
  std::vector<std::optional<double>> delta(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] && b[i]) delta[i] = *a[i] - *b[i];
  }
  table.set_column(out_column, delta);
}

std::vector<GroupAverages> aggregate_averages(const ResultTable& table, const AverageOptions& options) {
  if (table.rows().empty()) throw Error(ErrorKind::EmptyInput, "no rows to average");
  if (options.require_column && !table.has_column(*options.require_column)) {
    throw Error(ErrorKind::UnknownColumn, *options.require_column);
  }
  std::vector<GroupAverages> groups;
  auto group_for = [&](const std::string& language) -> GroupAverages& {
    for (auto& g : groups) {
      if (g.language == language) return g;
    }
    GroupAverages g;
    g.language = language;
    for (const auto& c : table.score_columns()) g.columns[c] = std::nullopt;
    groups.push_back(std::move(g));
    return groups.back();
  };
  std::map<std::string, std::map<std::string, std::pair<double, std::size_t>>> sums;
  for (const auto& row : table.rows()) {
    GroupAverages& g = group_for(row.language);
    if (options.require_column && !row.score(*options.require_column)) continue;
    ++g.rows;
    for (const auto& c : table.score_columns()) {
      if (const auto v = row.score(c)) {
        auto& [sum, n] = sums[row.language][c];
        sum += *v;
        ++n;
      }
    }
  }
  for (auto& g : groups) {
    for (const auto& [c, acc] : sums[g.language]) {
      if (acc.second > 0) g.columns[c] = ColumnAverage{acc.first / static_cast<double>(acc.second), acc.second};
    }
  }
  return groups;
}

std::string_view to_string(WilcoxonResult::Method method) {
  return method == WilcoxonResult::Method::exact ? "exact" : "normal_approx";
}

json WilcoxonResult::to_json() const {
  return {{"n_effective", n_effective}, {"statistic", statistic}, {"t_plus", t_plus},
          {"t_minus", t_minus},         {"p_value", p_value},     {"method", to_string(method)}};
}

namespace {

bool nearly_equal(double x, double y) {
  return std::fabs(x - y) <= 1e-9 * std::max({1.0, std::fabs(x), std::fabs(y)});
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

double wilcoxon_exact_p(const std::vector<double>& ranks, double t_plus) {
  std::vector<std::size_t> doubled;
  std::size_t total = 0;
  for (double r : ranks) {
    doubled.push_back(static_cast<std::size_t>(std::llround(2.0 * r)));
    total += doubled.back();
  }
  std::vector<double> ways(total + 1, 0.0);
  ways[0] = 1.0;
  std::size_t reach = 0;
  for (std::size_t r : doubled) {
    for (std::size_t s = reach + 1; s-- > 0;) {
      if (ways[s] != 0.0) ways[s + r] += ways[s];
    }
    reach += r;
  }
  const double all = std::ldexp(1.0, static_cast<int>(ranks.size()));
  const auto t = static_cast<std::size_t>(std::llround(2.0 * t_plus));
  double lower = 0.0;
  double upper = 0.0;
  for (std::size_t s = 0; s <= total; ++s) {
    if (s <= t) lower += ways[s];
    if (s >= t) upper += ways[s];
  }
  return std::min(1.0, 2.0 * std::min(lower, upper) / all);
}

double wilcoxon_normal_p(const std::vector<double>& ranks, double t_plus) {
  const auto n = static_cast<double>(ranks.size());
  const double mean = n * (n + 1.0) / 4.0;
  double variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
  std::vector<double> sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const auto t = static_cast<double>(j - i);
    variance -= (t * t * t - t) / 48.0;
    i = j;
  }
  if (variance <= 0.0) return 1.0;
  const double diff = t_plus - mean;
  const double correction = diff > 0 ? 0.5 : (diff < 0 ? -0.5 : 0.0);
  const double z = (diff - correction) / std::sqrt(variance);
  return std::min(1.0, 2.0 * normal_cdf(-std::fabs(z)));
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::LengthMismatch, std::to_string(a.size()) + " vs " + std::to_string(b.size()) + " values");
  }
  if (a.size() < 3) throw Error(ErrorKind::EmptyInput, "at least 3 pairs are required");

  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!nearly_equal(a[i], b[i])) diffs.push_back(a[i] - b[i]);
  }
  if (diffs.empty()) throw Error(ErrorKind::AllZeroDifferences, std::to_string(a.size()) + " pairs");

  std::vector<std::size_t> order(diffs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return std::fabs(diffs[x]) < std::fabs(diffs[y]); });
  std::vector<double> ranks(diffs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i + 1;
    while (j < order.size() && nearly_equal(std::fabs(diffs[order[j]]), std::fabs(diffs[order[i]]))) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }

  WilcoxonResult result;
  result.n_effective = diffs.size();
  for (std::size_t i = 0; i < diffs.size(); ++i) (diffs[i] > 0 ? result.t_plus : result.t_minus) += ranks[i];
  result.statistic = std::min(result.t_plus, result.t_minus);
  if (result.n_effective <= kWilcoxonExactMax) {
    result.method = WilcoxonResult::Method::exact;
    result.p_value = wilcoxon_exact_p(ranks, result.t_plus);
  } else {
    result.method = WilcoxonResult::Method::normal_approx;
    result.p_value = wilcoxon_normal_p(ranks, result.t_plus);
  }
  return result;
}

std::vector<RelativeImprovement> relative_improvement(const ResultTable& table, const std::string& model,
                                                      const std::string& baseline) {
  if (!table.has_column(model)) throw Error(ErrorKind::UnknownColumn, model);
  if (!table.has_column(baseline)) throw Error(ErrorKind::UnknownColumn, baseline);

  struct Acc {
    double ratio_sum = 0.0, model_sum = 0.0, base_sum = 0.0;
    std::size_t n = 0;
  };
  std::vector<std::string> scopes{"all"};
  std::map<std::string, Acc> acc;
  for (const auto& row : table.rows()) {
    const auto m = row.score(model);
    const auto b = row.score(baseline);
    if (!m || !b || *b == 0.0) continue;
    if (std::find(scopes.begin(), scopes.end(), row.language) == scopes.end()) scopes.push_back(row.language);
    for (const std::string& scope : {std::string("all"), row.language}) {
      Acc& a = acc[scope];
      a.ratio_sum += (*m - *b) / *b;
      a.model_sum += *m;
      a.base_sum += *b;
      ++a.n;
    }
  }
  std::vector<RelativeImprovement> out;
  for (const auto& scope : scopes) {
    const Acc& a = acc[scope];
    if (a.n == 0) continue;
    const auto n = static_cast<double>(a.n);
    out.push_back({scope, a.n, a.ratio_sum / n, (a.model_sum - a.base_sum) / a.base_sum});
  }
  return out;
}

std::string column_heading(const std::string& name) {
  static const std::map<std::string, std::string> kHeadings = {
      {"language", "Language"},         {"task", "Task"},
      {"dataset", "Dataset"},           {"metric", "Metric"},
      {"sota", "SOTA"},                 {"base", "Base"},
      {"model_native", "Model (native)"}, {"model_english", "Model (English)"},
      {"delta", "Δ"},
  };
  const auto it = kHeadings.find(name);
  return it == kHeadings.end() ? name : it->second;
}

std::string render_markdown(const ReportContent& content) {
  const ResultTable& table = content.table;
  const auto& attrs = table.attribute_columns();
  const auto& scores = content.columns.empty() ? table.score_columns() : content.columns;

  std::string out = "# Results\n";
  std::vector<std::string> languages;
  for (const auto& r : table.rows()) {
    if (std::find(languages.begin(), languages.end(), r.language) == languages.end()) languages.push_back(r.language);
  }

  auto header = [&] {
    std::string h = "| " + column_heading("dataset");
    std::string rule = "|---";
    for (const auto& a : attrs) {
      h += " | " + column_heading(a);
      rule += "|---";
    }
    for (const auto& s : scores) {
      h += " | " + column_heading(s);
      rule += "|---:";
    }
    return h + " |\n" + rule + "|\n";
  };

  for (const auto& lang : languages) {
    out += "\n## " + lang + "\n\n" + header();
    for (const auto& r : table.rows()) {
      if (r.language != lang) continue;
      std::string line = "| " + r.dataset;
      for (const auto& a : attrs) {
        const auto it = r.attributes.find(a);
        line += " | " + (it == r.attributes.end() ? std::string() : it->second);
      }
      for (const auto& s : scores) {
        const auto v = r.score(s);
        line += " | " + (v ? format_fixed3(*v) : std::string("--"));
      }
      out += line + " |\n";
    }
    for (const auto& g : content.averages) {
      if (g.language != lang) continue;
      std::string line = "| **Average**";
      for (std::size_t i = 0; i < attrs.size(); ++i) line += " | ";
      for (const auto& s : scores) {
        const auto it = g.columns.find(s);
        line += " | " + (it != g.columns.end() && it->second ? format_fixed3(it->second->mean) : std::string("--"));
      }
      out += line + " |\n";
      out += "\nAverage over " + std::to_string(g.rows) + " rows.\n";
    }
  }

  if (!content.improvements.empty()) {
    out += "\n## Relative improvement";
    if (!content.improvement_label.empty()) out += " (" + content.improvement_label + ")";
    out += "\n\n| Scope | Rows | Mean of ratios | Ratio of means |\n|---|---:|---:|---:|\n";
    for (const auto& imp : content.improvements) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "| %s | %zu | %.1f%% | %.1f%% |\n", imp.scope.c_str(), imp.rows,
                    100.0 * imp.mean_of_ratios, 100.0 * imp.ratio_of_means);
      out += buf;
    }
  }

  if (!content.stats.empty()) {
    out += "\n## Wilcoxon signed-rank\n\n| Comparison | n | W | p | Method |\n|---|---:|---:|---:|---|\n";
    for (const auto& s : content.stats) {
      char buf[256];
      std::snprintf(buf, sizeof buf, "| %s | %zu | %.1f | %.4f | %s |\n", s.label.c_str(), s.result.n_effective,
                    s.result.statistic, s.result.p_value, std::string(to_string(s.result.method)).c_str());
      out += buf;
    }
  }
  return out;
}

std::string render_csv(const ResultTable& table) {
  std::string out = "language,dataset";
  for (const auto& a : table.attribute_columns()) out += "," + io::quote_csv(a);
  for (const auto& s : table.score_columns()) out += "," + io::quote_csv(s);
  out += "\n";
  for (const auto& r : table.rows()) {
    out += io::quote_csv(r.language) + "," + io::quote_csv(r.dataset);
    for (const auto& a : table.attribute_columns()) {
      const auto it = r.attributes.find(a);
      out += "," + io::quote_csv(it == r.attributes.end() ? std::string() : it->second);
    }
    for (const auto& s : table.score_columns()) {
      const auto v = r.score(s);
      out += "," + (v ? format_shortest(*v) : std::string("--"));
    }
    out += "\n";
  }
  return out;
}

void render_report(const ReportContent& content, ReportFormat format, const std::filesystem::path& path) {
  io::write_file(path, format == ReportFormat::markdown ? render_markdown(content) : render_csv(content.table));
}

}  // namespace instructkit
