#include "instructkit/postprocess.hpp"

#include <algorithm>

#include "instructkit/corpus.hpp"
#include "instructkit/error.hpp"
#include "instructkit/io.hpp"
#include "instructkit/unicode.hpp"

namespace instructkit {

void TransliterationMap::add(std::string_view source, std::string_view replacement) {
  std::u32string src = unicode::decode(source);
  if (src.empty()) throw Error(ErrorKind::InvariantViolation, "empty transliteration source");
  for (char32_t cp : src) {
    if (unicode::is_latin(cp)) {
      throw Error(ErrorKind::InvariantViolation, "transliteration source '" + std::string(source) + "' contains Latin text");
    }
  }
  if (replacement.empty() ||
      !std::all_of(replacement.begin(), replacement.end(), [](char c) { return c >= 'a' && c <= 'z'; })) {
    throw Error(ErrorKind::InvariantViolation, "replacement '" + std::string(replacement) + "' must be lowercase ASCII letters");
  }
  Rule rule{std::move(src), std::string(replacement)};
  const auto pos = std::find_if(rules_.begin(), rules_.end(),
                                [&](const Rule& r) { return r.source.size() < rule.source.size(); });
  rules_.insert(pos, std::move(rule));
}

std::string TransliterationMap::apply(std::string_view utf8) const {
  const std::u32string cps = unicode::decode(utf8);
  std::string out;
  out.reserve(utf8.size());
  std::size_t i = 0;
  while (i < cps.size()) {
    const char32_t cp = cps[i];
    const Rule* hit = nullptr;
    if (!unicode::is_latin(cp) && unicode::is_letter(cp)) {
      for (const Rule& r : rules_) {
        if (std::u32string_view(cps).substr(i, r.source.size()) == r.source) {
          hit = &r;
          break;
        }
      }
    }
    if (hit) {
      out += hit->replacement;
      i += hit->source.size();
    } else {
      unicode::append(out, cp);
      ++i;
    }
  }
  return out;
}

const TransliterationMap& TransliterationMap::arabic_default() {
  static const TransliterationMap map = [] {
    static constexpr std::pair<std::string_view, std::string_view> kTable[] = {
        {"ا", "a"},  {"أ", "a"},  {"إ", "i"},  {"آ", "a"},  {"ٱ", "a"},  {"ء", "a"},  {"ب", "b"},
        {"ت", "t"},  {"ث", "th"}, {"ج", "j"},  {"ح", "h"},  {"خ", "kh"}, {"د", "d"},  {"ذ", "dh"},
        {"ر", "r"},  {"ز", "z"},  {"س", "s"},  {"ش", "sh"}, {"ص", "s"},  {"ض", "d"},  {"ط", "t"},
        {"ظ", "z"},  {"ع", "a"},  {"غ", "gh"}, {"ف", "f"},  {"ق", "q"},  {"ك", "k"},  {"ل", "l"},
        {"م", "m"},  {"ن", "n"},  {"ه", "h"},  {"ة", "h"},  {"و", "w"},  {"ؤ", "w"},  {"ي", "y"},
        {"ى", "a"},  {"ئ", "y"},  {"پ", "p"},  {"چ", "ch"}, {"ڤ", "v"},  {"گ", "g"},  {"ک", "k"},
        {"ی", "y"},
    };
    TransliterationMap m;
    for (const auto& [src, dst] : kTable) m.add(src, dst);
    return m;
  }();
  return map;
}

TransliterationMap TransliterationMap::load(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  TransliterationMap map;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    const std::string_view line(text.data() + pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    const std::string trimmed = unicode::trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    const auto tab = trimmed.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorKind::ParseError, path.string() + " line " + std::to_string(line_no) + ": expected source<TAB>replacement");
    }
    map.add(unicode::trim(std::string_view(trimmed).substr(0, tab)), unicode::trim(std::string_view(trimmed).substr(tab + 1)));
  }
  return map;
}

namespace {

std::string clean(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : unicode::decode(text)) {
    const char32_t lc = unicode::to_lower(cp);
    if (unicode::is_letter(lc) || unicode::is_digit(lc) || lc == U'-' || lc == U'_') {
      unicode::append(out, lc);
    } else {
      out.push_back(' ');
    }
  }
  return unicode::collapse_whitespace(out);
}

std::vector<std::string> tokens_of(std::string_view normalized) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < normalized.size()) {
    std::size_t sp = normalized.find(' ', pos);
    if (sp == std::string_view::npos) sp = normalized.size();
    if (sp > pos) out.emplace_back(normalized.substr(pos, sp - pos));
    pos = sp + 1;
  }
  return out;
}

struct Match {
  std::size_t label;     // index into label_space
  std::size_t position;  // first token
  std::size_t width;     // tokens
  std::size_t length;    // bytes of the normalized label
};

/// Non-overlapping matches in priority order.
std::vector<Match> find_matches(const std::vector<std::string>& text_tokens,
                                const std::vector<std::vector<std::string>>& label_tokens,
                                const std::vector<std::size_t>& label_lengths) {
  std::vector<Match> candidates;
  for (std::size_t k = 0; k < label_tokens.size(); ++k) {
    const auto& lt = label_tokens[k];
    if (lt.empty() || lt.size() > text_tokens.size()) continue;
    for (std::size_t p = 0; p + lt.size() <= text_tokens.size(); ++p) {
      if (std::equal(lt.begin(), lt.end(), text_tokens.begin() + static_cast<std::ptrdiff_t>(p))) {
        candidates.push_back({k, p, lt.size(), label_lengths[k]});
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Match& a, const Match& b) {
    if (a.length != b.length) return a.length > b.length;
    if (a.position != b.position) return a.position < b.position;
    return a.label < b.label;
  });
  std::vector<Match> chosen;
  std::vector<bool> taken(text_tokens.size(), false);
  for (const Match& m : candidates) {
    bool free = true;
    for (std::size_t t = m.position; t < m.position + m.width; ++t) free = free && !taken[t];
    if (!free) continue;
    for (std::size_t t = m.position; t < m.position + m.width; ++t) taken[t] = true;
    chosen.push_back(m);
  }
  return chosen;
}

}  // namespace

std::string normalize_output(std::string_view text, const TransliterationMap& map) {
  return map.apply(clean(text));
}

std::string_view to_string(ExtractionResult::Rule rule) {
  switch (rule) {
    case ExtractionResult::Rule::exact: return "exact";
    case ExtractionResult::Rule::pattern: return "pattern";
    case ExtractionResult::Rule::transliterated: return "transliterated";
    case ExtractionResult::Rule::fuzzy_none: return "fuzzy_none";
  }
  return "fuzzy_none";
}

ExtractionResult extract_label(std::string_view text, const std::vector<std::string>& label_space, TaskKind kind,
                               const TransliterationMap& map) {
  std::vector<std::vector<std::string>> label_tokens;
  std::vector<std::size_t> label_lengths;
  std::vector<std::string> label_norms;
  for (const auto& label : label_space) {
    label_norms.push_back(normalize_output(label, map));
    label_tokens.push_back(tokens_of(label_norms.back()));
    label_lengths.push_back(label_norms.back().size());
  }

  ExtractionResult result;
  const std::string plain = clean(text);
  const std::string transliterated = map.apply(plain);
  result.normalized_text = transliterated;

  std::vector<Match> matches = find_matches(tokens_of(plain), label_tokens, label_lengths);
  if (!matches.empty()) {
    result.rule_fired = (matches.size() == 1 && label_norms[matches.front().label] == plain) ? ExtractionResult::Rule::exact
                                                                                             : ExtractionResult::Rule::pattern;
  } else if (transliterated != plain) {
    matches = find_matches(tokens_of(transliterated), label_tokens, label_lengths);
    if (!matches.empty()) result.rule_fired = ExtractionResult::Rule::transliterated;
  }
  if (matches.empty()) return result;

  result.status = ExtractionResult::Status::matched;
  if (kind == TaskKind::multi_label) {
    for (const Match& m : matches) result.labels.push_back(label_space[m.label]);
    std::sort(result.labels.begin(), result.labels.end());
    result.labels.erase(std::unique(result.labels.begin(), result.labels.end()), result.labels.end());
  } else {
    result.labels.push_back(label_space[matches.front().label]);
  }
  return result;
}

ScoredPair score_input(std::string_view prediction_text, const LabelSet& gold, const DatasetMeta& meta,
                       const TransliterationMap& map) {
  ScoredPair pair;
  pair.gold = gold;
  pair.predicted_text = std::string(prediction_text);
  if (meta.task_kind == TaskKind::summarization) return pair;
  const ExtractionResult r = extract_label(prediction_text, meta.label_space, meta.task_kind, map);
  if (r.status == ExtractionResult::Status::matched) {
    pair.predicted = r.labels;
  } else {
    pair.predicted = {std::string(kUnparseableLabel)};
    pair.unparseable = true;
  }
  return pair;
}

ScoredPair score_input(std::string_view prediction_text, std::string_view gold_summary, const DatasetMeta& meta) {
  if (meta.task_kind != TaskKind::summarization) {
    return score_input(prediction_text, parse_gold(gold_summary, meta.task_kind), meta);
  }
  ScoredPair pair;
  pair.predicted_text = std::string(prediction_text);
  pair.gold_text = std::string(gold_summary);
  return pair;
}

LabelSet parse_gold(std::string_view serialized, TaskKind kind) {
  LabelSet out;
  if (kind == TaskKind::summarization) return out;
  if (kind == TaskKind::single_label) {
    out.emplace_back(serialized);
    return out;
  }
  std::size_t pos = 0;
  while (pos <= serialized.size()) {
    std::size_t sep = serialized.find(", ", pos);
    if (sep == std::string_view::npos) sep = serialized.size();
    if (sep > pos) out.emplace_back(serialized.substr(pos, sep - pos));
    pos = sep + 2;
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace instructkit
