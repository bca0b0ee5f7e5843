#include "dup/answer.hpp"

#include <charconv>
#include <stdexcept>

#include "text_util.hpp"

namespace duprompt {

std::string_view to_string(AnswerType type) {
  switch (type) {
    case AnswerType::number: return "number";
    case AnswerType::option: return "option";
    case AnswerType::yes_no: return "yes_no";
    case AnswerType::string: return "string";
  }
  return "unknown";
}

std::optional<AnswerType> parse_answer_type(std::string_view name) {
  const auto n = text::lower(name);
  if (n == "number") return AnswerType::number;
  if (n == "option") return AnswerType::option;
  if (n == "yes_no" || n == "yes-no" || n == "yesno") return AnswerType::yes_no;
  if (n == "string") return AnswerType::string;
  return std::nullopt;
}

std::optional<Decimal> Decimal::parse(std::string_view s) {
  bool negative = false;
  if (!s.empty() && s.front() == '-') {
    negative = true;
    s.remove_prefix(1);
  }
  const auto dot = s.find('.');
  auto int_part = s.substr(0, dot);
  auto frac_part = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  if (int_part.empty()) return std::nullopt;
  if (dot != std::string_view::npos && frac_part.empty()) return std::nullopt;
  for (char c : int_part) if (!text::is_digit(c)) return std::nullopt;
  for (char c : frac_part) if (!text::is_digit(c)) return std::nullopt;

  while (int_part.size() > 1 && int_part.front() == '0') int_part.remove_prefix(1);
  while (!frac_part.empty() && frac_part.back() == '0') frac_part.remove_suffix(1);

  std::string out;
  const bool zero = int_part == "0" && frac_part.empty();
  if (negative && !zero) out.push_back('-');
  out.append(int_part);
  if (!frac_part.empty()) {
    out.push_back('.');
    out.append(frac_part);
  }
  return Decimal(std::move(out));
}

double Decimal::to_double() const {
  double value = 0.0;
  const auto* first = text_.data();
  const auto* last = text_.data() + text_.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) throw std::logic_error("non-canonical decimal: " + text_);
  return value;
}

Decimal Decimal::scaled_down(int places) const {
  std::string_view s = text_;
  const bool negative = is_negative();
  if (negative) s.remove_prefix(1);
  const auto dot = s.find('.');
  std::string digits(s.substr(0, dot));
  std::string frac = dot == std::string_view::npos ? std::string{} : std::string(s.substr(dot + 1));
  std::string all = digits + frac;
  auto point = static_cast<long>(digits.size()) - places;
  if (point <= 0) {
    all.insert(0, static_cast<std::size_t>(1 - point), '0');
    point = 1;
  }
  std::string raw = (negative ? "-" : "") + all.substr(0, static_cast<std::size_t>(point));
  const auto rest = all.substr(static_cast<std::size_t>(point));
  if (!rest.empty()) raw += "." + rest;
  auto parsed = parse(raw);
  if (!parsed) throw std::logic_error("decimal scaling produced invalid text: " + raw);
  return *parsed;
}

NormalizedAnswer NormalizedAnswer::number(Decimal value, bool percent) {
  return NormalizedAnswer(NumberAnswer{std::move(value), percent});
}

NormalizedAnswer NormalizedAnswer::option(char letter) {
  const char up = text::to_upper(letter);
  if (up < 'A' || up > 'E') throw std::invalid_argument(std::string("option letter out of range: ") + letter);
  return NormalizedAnswer(up);
}

NormalizedAnswer NormalizedAnswer::yes_no(YesNo value) { return NormalizedAnswer(value); }

NormalizedAnswer NormalizedAnswer::text(std::string value) { return NormalizedAnswer(std::move(value)); }

AnswerType NormalizedAnswer::kind() const {
  switch (payload_.index()) {
    case 0: return AnswerType::number;
    case 1: return AnswerType::option;
    case 2: return AnswerType::yes_no;
    default: return AnswerType::string;
  }
}

std::optional<char> NormalizedAnswer::option_value() const {
  if (const auto* c = std::get_if<char>(&payload_)) return *c;
  return std::nullopt;
}

std::optional<YesNo> NormalizedAnswer::yes_no_value() const {
  if (const auto* v = std::get_if<YesNo>(&payload_)) return *v;
  return std::nullopt;
}

std::string NormalizedAnswer::to_text() const {
  switch (kind()) {
    case AnswerType::number: {
      const auto& n = std::get<NumberAnswer>(payload_);
      return n.value.str() + (n.percent ? "%" : "");
    }
    case AnswerType::option: return std::string(1, std::get<char>(payload_));
    case AnswerType::yes_no: return std::get<YesNo>(payload_) == YesNo::yes ? "yes" : "no";
    case AnswerType::string: return std::get<std::string>(payload_);
  }
  return {};
}

}  // namespace duprompt
