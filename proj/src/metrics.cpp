#include "instructkit/metrics.hpp"

#include <algorithm>

#include "instructkit/error.hpp"
#include "instructkit/unicode.hpp"

namespace instructkit {

ConfusionCounts::ConfusionCounts(const std::vector<LabelSet>& preds, const std::vector<LabelSet>& golds) {
  if (preds.size() != golds.size()) {
    throw Error(ErrorKind::LengthMismatch, std::to_string(preds.size()) + " predictions vs " + std::to_string(golds.size()) + " golds");
  }
  items_ = preds.size();
  for (std::size_t i = 0; i < preds.size(); ++i) {
    LabelSet p = preds[i];
    LabelSet g = golds[i];
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    if (p == g) ++exact_;
    for (const auto& label : g) {
      auto& c = classes_[label];
      ++c.support;
      if (std::binary_search(p.begin(), p.end(), label)) {
        ++c.tp;
      } else {
        ++c.fn;
      }
    }
    for (const auto& label : p) {
      if (!std::binary_search(g.begin(), g.end(), label)) ++classes_[label].fp;
    }
  }
}

double f1_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  const std::size_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : static_cast<double>(2 * tp) / static_cast<double>(denom);
}

double ConfusionCounts::f1(const std::string& label) const {
  const auto it = classes_.find(label);
  if (it == classes_.end()) return 0.0;
  return f1_from_counts(it->second.tp, it->second.fp, it->second.fn);
}

double classification_metric(const MetricKind& kind, const std::vector<LabelSet>& preds,
                             const std::vector<LabelSet>& golds, const std::vector<std::string>& label_space) {
  if (preds.size() != golds.size()) {
    throw Error(ErrorKind::LengthMismatch, std::to_string(preds.size()) + " predictions vs " + std::to_string(golds.size()) + " golds");
  }
  if (golds.empty()) throw Error(ErrorKind::EmptyInput, "no items to score");
  const ConfusionCounts counts(preds, golds);

  switch (kind.kind) {
    case MetricKind::Kind::accuracy:
      return static_cast<double>(counts.exact_matches()) / static_cast<double>(counts.items());
    case MetricKind::Kind::micro_f1: {
      std::size_t tp = 0, fp = 0, fn = 0;
      for (const auto& [_, c] : counts.classes()) {
        tp += c.tp;
        fp += c.fp;
        fn += c.fn;
      }
      return f1_from_counts(tp, fp, fn);
    }
    case MetricKind::Kind::macro_f1: {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& [label, c] : counts.classes()) {
        if (c.support == 0) continue;
        sum += f1_from_counts(c.tp, c.fp, c.fn);
        ++n;
      }
      return n == 0 ? 0.0 : sum / static_cast<double>(n);
    }
    case MetricKind::Kind::weighted_f1: {
      double sum = 0.0;
      std::size_t support = 0;
      for (const auto& [label, c] : counts.classes()) {
        sum += static_cast<double>(c.support) * f1_from_counts(c.tp, c.fp, c.fn);
        support += c.support;
      }
      return support == 0 ? 0.0 : sum / static_cast<double>(support);
    }
    case MetricKind::Kind::f1_positive: {
      const bool known = label_space.empty()
                             ? counts.classes().contains(kind.positive_label)
                             : std::find(label_space.begin(), label_space.end(), kind.positive_label) != label_space.end();
      if (kind.positive_label.empty() || !known) throw Error(ErrorKind::UnknownPositiveLabel, kind.positive_label);
      return counts.f1(kind.positive_label);
    }
    case MetricKind::Kind::rouge2:
      throw Error(ErrorKind::MetricTaskMismatch, "rouge2 is not a classification metric");
  }
  return 0.0;
}

std::vector<std::string> rouge_tokenize(std::string_view text) {
  std::string cleaned;
  for (char32_t cp : unicode::decode(text)) {
    const char32_t lc = unicode::to_lower(cp);
    if (unicode::is_letter(lc) || unicode::is_digit(lc) || unicode::is_mark(lc)) {
      unicode::append(cleaned, lc);
    } else {
      cleaned.push_back(' ');
    }
  }
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  while (pos < cleaned.size()) {
    std::size_t sp = cleaned.find(' ', pos);
    if (sp == std::string::npos) sp = cleaned.size();
    if (sp > pos) tokens.push_back(cleaned.substr(pos, sp - pos));
    pos = sp + 1;
  }
  return tokens;
}

namespace {

std::map<std::pair<std::string, std::string>, std::size_t> bigrams(const std::vector<std::string>& tokens) {
  std::map<std::pair<std::string, std::string>, std::size_t> out;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) ++out[{tokens[i], tokens[i + 1]}];
  return out;
}

}  // namespace

RougeScore rouge2(std::string_view candidate, std::string_view reference) {
  const auto cand_tokens = rouge_tokenize(candidate);
  const auto ref_tokens = rouge_tokenize(reference);
  const auto cand = bigrams(cand_tokens);
  const auto ref = bigrams(ref_tokens);

  RougeScore s;
  s.candidate_bigrams = cand_tokens.size() < 2 ? 0 : cand_tokens.size() - 1;
  s.reference_bigrams = ref_tokens.size() < 2 ? 0 : ref_tokens.size() - 1;
  for (const auto& [bigram, count] : cand) {
    if (const auto it = ref.find(bigram); it != ref.end()) s.overlap += std::min(count, it->second);
  }
  if (s.candidate_bigrams > 0) s.precision = static_cast<double>(s.overlap) / static_cast<double>(s.candidate_bigrams);
  if (s.reference_bigrams > 0) s.recall = static_cast<double>(s.overlap) / static_cast<double>(s.reference_bigrams);
  if (s.candidate_bigrams > 0 && s.reference_bigrams > 0 && s.overlap > 0) {
    // 2PR/(P+R) reduces to 2*overlap/(|cand| + |ref|).
    s.f1 = static_cast<double>(2 * s.overlap) / static_cast<double>(s.candidate_bigrams + s.reference_bigrams);
  }
  return s;
}

nlohmann::json EvalOutcome::to_json() const {
  return {{"dataset_id", dataset_id},   {"metric", metric.to_string()},
          {"score", score},             {"pairs", pairs},
          {"unparseable", unparseable}, {"missing_predictions", missing_predictions},
          {"prediction_file", prediction_file}};
}

EvalOutcome EvalOutcome::from_json(const nlohmann::json& j) {
  EvalOutcome o;
  o.dataset_id = j.at("dataset_id").get<std::string>();
  o.metric = MetricKind::parse(j.at("metric").get<std::string>());
  o.score = j.at("score").get<double>();
  o.pairs = j.value("pairs", std::size_t{0});
  o.unparseable = j.value("unparseable", std::size_t{0});
  o.missing_predictions = j.value("missing_predictions", std::size_t{0});
  o.prediction_file = j.value("prediction_file", std::string());
  return o;
}

EvalOutcome evaluate_dataset(const std::vector<ScoredPair>& pairs, const DatasetMeta& meta) {
  if (pairs.empty()) throw Error(ErrorKind::EmptyInput, meta.id + ": no scored pairs");
  const bool summarization = meta.task_kind == TaskKind::summarization;
  if ((meta.metric.kind == MetricKind::Kind::rouge2) != summarization) {
    throw Error(ErrorKind::MetricTaskMismatch, meta.id + ": " + meta.metric.to_string());
  }

  EvalOutcome out;
  out.dataset_id = meta.id;
  out.metric = meta.metric;
  out.pairs = pairs.size();
  if (summarization) {
    double sum = 0.0;
    for (const auto& p : pairs) sum += rouge2(p.predicted_text, p.gold_text).f1;
    out.score = sum / static_cast<double>(pairs.size());
    return out;
  }
  std::vector<LabelSet> preds;
  std::vector<LabelSet> golds;
  for (const auto& p : pairs) {
    preds.push_back(p.predicted);
    golds.push_back(p.gold);
    out.unparseable += p.unparseable ? 1 : 0;
  }
  out.score = classification_metric(meta.metric, preds, golds, meta.label_space);
  return out;
}

}  // namespace instructkit
