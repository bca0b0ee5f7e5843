#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace duprompt {

/// Answer format of a benchmark. Each known dataset maps to exactly one.
enum class AnswerType { number, option, yes_no, string };

std::string_view to_string(AnswerType type);
std::optional<AnswerType> parse_answer_type(std::string_view name);

/// Exact decimal kept in canonical text form: optional '-', integer digits
/// without leading zeros, then '.' and fraction digits without trailing zeros
/// when the value is not integral. Converted to binary only for comparison.
class Decimal {
 public:
  /// Accepts `-?[0-9]+(\.[0-9]+)?`. No grouping commas, exponents or signs
  /// other than a leading '-'.
  static std::optional<Decimal> parse(std::string_view text);

  const std::string& str() const { return text_; }
  double to_double() const;
  bool is_negative() const { return !text_.empty() && text_.front() == '-'; }

  /// Value divided by 10^places, exact.
  Decimal scaled_down(int places) const;

  bool operator==(const Decimal&) const = default;

 private:
  explicit Decimal(std::string canonical) : text_(std::move(canonical)) {}
  std::string text_;
};

enum class YesNo { yes, no };

struct NumberAnswer {
  Decimal value;
  // Written with a trailing '%'. Whether it scales by 1/100 is decided at
  // grading time against the gold magnitude.
  bool percent = false;
  bool operator==(const NumberAnswer&) const = default;
};

/// A predicted or gold answer reduced to a canonical, comparable payload.
/// The payload alternative always matches kind().
class NormalizedAnswer {
 public:
  static NormalizedAnswer number(Decimal value, bool percent = false);
  /// `letter` must be in A-E (either case); stored upper-case.
  static NormalizedAnswer option(char letter);
  static NormalizedAnswer yes_no(YesNo value);
  static NormalizedAnswer text(std::string value);

  AnswerType kind() const;

  const NumberAnswer* number_value() const { return std::get_if<NumberAnswer>(&payload_); }
  std::optional<char> option_value() const;
  std::optional<YesNo> yes_no_value() const;
  const std::string* text_value() const { return std::get_if<std::string>(&payload_); }

  /// Canonical textual form; re-normalizing it under kind() yields *this.
  std::string to_text() const;

  bool operator==(const NormalizedAnswer&) const = default;

 private:
  using Payload = std::variant<NumberAnswer, char, YesNo, std::string>;
  explicit NormalizedAnswer(Payload payload) : payload_(std::move(payload)) {}
  Payload payload_;
};

}  // namespace duprompt
