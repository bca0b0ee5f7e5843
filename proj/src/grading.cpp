#include "dup/grading.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "text_util.hpp"

namespace duprompt::grading {
namespace {

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), text::is_digit);
}

std::optional<NormalizedAnswer> normalize_number(std::string_view s) {
  const auto tokens = scan_numbers(s);
  if (tokens.empty()) return std::nullopt;
  const auto& last = tokens.back();
  auto value = Decimal::parse(last.text);
  if (!value) return std::nullopt;
  return NormalizedAnswer::number(*value, last.percent);
}

std::optional<NormalizedAnswer> normalize_option(std::string_view s) {
  const auto n = s.size();
  for (std::size_t i = 0; i < n; ++i) {
    const char c = s[i];
    if (c >= 'A' && c <= 'E') {
      const bool left = i == 0 || !text::is_alnum(s[i - 1]);
      const bool right = i + 1 == n || !text::is_alnum(s[i + 1]);
      if (left && right) return NormalizedAnswer::option(c);
    }
    if (c == '(' && i + 2 < n && s[i + 2] == ')') {
      const char up = text::to_upper(s[i + 1]);
      if (up >= 'A' && up <= 'E') return NormalizedAnswer::option(up);
    }
  }
  return std::nullopt;
}

std::optional<NormalizedAnswer> normalize_yes_no(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    if (!text::is_word(s[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && text::is_word(s[j])) ++j;
    const auto word = text::lower(s.substr(i, j - i));
    if (word == "yes" || word == "true") return NormalizedAnswer::yes_no(YesNo::yes);
    if (word == "no" || word == "false") return NormalizedAnswer::yes_no(YesNo::no);
    i = j;
  }
  return std::nullopt;
}

bool strip_quotes(std::string_view& s) {
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 4> kQuotes{{
      {"\"", "\""}, {"'", "'"}, {"\xE2\x80\x9C", "\xE2\x80\x9D"}, {"\xE2\x80\x98", "\xE2\x80\x99"}}};
  for (const auto& [open, close] : kQuotes) {
    if (s.size() >= open.size() + close.size() && s.starts_with(open) && s.ends_with(close)) {
      s.remove_prefix(open.size());
      s.remove_suffix(close.size());
      return true;
    }
  }
  return false;
}

std::optional<NormalizedAnswer> normalize_string(std::string_view s) {
  s = text::trim(s);
  bool changed = true;
  while (changed && !s.empty()) {
    changed = false;
    if (s.back() == '.') {
      s.remove_suffix(1);
      changed = true;
    }
    if (strip_quotes(s)) changed = true;
    const auto trimmed = text::trim(s);
    if (trimmed.size() != s.size()) changed = true;
    s = trimmed;
  }
  if (s.empty()) return std::nullopt;
  return NormalizedAnswer::text(text::lower(s));
}

}  // namespace

std::vector<NumberToken> scan_numbers(std::string_view s) {
  std::vector<NumberToken> out;
  const auto n = s.size();
  std::size_t i = 0;
  while (i < n) {
    if (!text::is_digit(s[i])) {
      ++i;
      continue;
    }
    NumberToken tok;
    const bool negative = i > 0 && s[i - 1] == '-' && (i == 1 || !text::is_alnum(s[i - 2]));
    tok.begin = negative ? i - 1 : i;
    if (negative) tok.text.push_back('-');

    std::size_t j = i;
    while (j < n && text::is_digit(s[j])) ++j;
    tok.text.append(s.substr(i, j - i));
    // Thousands groups: ",ddd" not followed by another digit.
    while (j + 3 < n && s[j] == ',' && all_digits(s.substr(j + 1, 3)) && (j + 4 >= n || !text::is_digit(s[j + 4]))) {
      tok.text.append(s.substr(j + 1, 3));
      j += 4;
    }
    if (j + 1 < n && s[j] == '.' && text::is_digit(s[j + 1])) {
      std::size_t k = j + 1;
      while (k < n && text::is_digit(s[k])) ++k;
      tok.text.append(s.substr(j, k - j));
      j = k;
    }
    if (j < n && s[j] == '%') {
      tok.percent = true;
      ++j;
    }
    tok.end = j;
    out.push_back(std::move(tok));
    i = j;
  }
  return out;
}

std::optional<NormalizedAnswer> normalize(std::string_view s, AnswerType answer_type) {
  switch (answer_type) {
    case AnswerType::number: return normalize_number(s);
    case AnswerType::option: return normalize_option(s);
    case AnswerType::yes_no: return normalize_yes_no(s);
    case AnswerType::string: return normalize_string(s);
  }
  return std::nullopt;
}

std::optional<NormalizedAnswer> extract_rule_based(std::string_view reasoning, AnswerType answer_type) {
  static constexpr std::array<std::string_view, 3> kMarkers{"answer is", "answer:", "= "};
  const auto lowered = text::lower(reasoning);
  std::size_t best = std::string::npos;
  std::size_t best_len = 0;
  for (auto marker : kMarkers) {
    const auto pos = lowered.rfind(marker);
    if (pos != std::string::npos && (best == std::string::npos || pos > best)) {
      best = pos;
      best_len = marker.size();
    }
  }
  if (best != std::string::npos) {
    auto span = reasoning.substr(best + best_len);
    span = span.substr(0, span.find('\n'));
    if (auto found = normalize(span, answer_type)) return found;
  }
  const auto line = text::last_nonempty_line(reasoning);
  if (line.empty()) return std::nullopt;
  return normalize(line, answer_type);
}

bool grade(const NormalizedAnswer& predicted, const NormalizedAnswer& gold) {
  if (predicted.kind() != gold.kind()) return false;
  if (predicted.kind() != AnswerType::number) return predicted == gold;

  const auto* p = predicted.number_value();
  const auto* g = gold.number_value();
  const double gv = g->percent ? g->value.scaled_down(2).to_double() : g->value.to_double();
  const bool scale = p->percent && std::fabs(gv) < 1.0;
  const double pv = scale ? p->value.scaled_down(2).to_double() : p->value.to_double();
  return std::fabs(pv - gv) <= kRelativeTolerance * std::max(1.0, std::fabs(gv));
}

std::string_view to_string(ExtractionSource source) {
  switch (source) {
    case ExtractionSource::llm: return "llm";
    case ExtractionSource::rule_fallback: return "rule_fallback";
    case ExtractionSource::none: return "none";
  }
  return "none";
}

ExtractionSource parse_extraction_source(std::string_view text) {
  if (text == "llm") return ExtractionSource::llm;
  if (text == "rule_fallback") return ExtractionSource::rule_fallback;
  return ExtractionSource::none;
}

GradedResult make_graded_result(std::string problem_id, std::optional<NormalizedAnswer> predicted,
                                ExtractionSource source, const NormalizedAnswer& gold) {
  GradedResult r;
  r.problem_id = std::move(problem_id);
  if (!predicted) return r;
  r.correct = grade(*predicted, gold);
  r.extraction_source = source;
  r.predicted = std::move(predicted);
  return r;
}

}  // namespace duprompt::grading
