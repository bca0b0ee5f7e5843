#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dup/answer.hpp"

namespace duprompt::grading {

/// Numeric token found by the scanner. `text` has grouping commas removed
/// and a leading '-' when the token is signed.
struct NumberToken {
  std::string text;
  bool percent = false;
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Numbers are `[0-9]+` optionally followed by ",ddd" thousands groups (a
/// group must not be followed by another digit) and ".d+". A '-' directly
/// before the digits is a sign unless it follows a letter or digit. A '%'
/// right after the number marks it as a percentage.
std::vector<NumberToken> scan_numbers(std::string_view text);

/// Reduces free text to an answer of `answer_type`, or nullopt.
///   number - last numeric token (currency, units, punctuation ignored)
///   option - first standalone capital A-E, or a parenthesized letter in
///            either case
///   yes_no - first word among yes / no / true / false
///   string - trimmed, lower-cased, quotes and a final period removed
std::optional<NormalizedAnswer> normalize(std::string_view text, AnswerType answer_type);

/// Rule-based fallback: normalizes the text after the last "answer is",
/// "answer:" or "= " (case-insensitive) up to the end of its line, then the
/// last non-empty line.
std::optional<NormalizedAnswer> extract_rule_based(std::string_view reasoning_text, AnswerType answer_type);

inline constexpr double kRelativeTolerance = 1e-6;

/// Numbers match when |p - g| <= 1e-6 * max(1, |g|); a percentage
/// prediction is divided by 100 first when |g| < 1. Other kinds compare
/// exactly. Differing kinds never match.
bool grade(const NormalizedAnswer& predicted, const NormalizedAnswer& gold);

enum class ExtractionSource { llm, rule_fallback, none };

std::string_view to_string(ExtractionSource source);
ExtractionSource parse_extraction_source(std::string_view text);

struct GradedResult {
  std::string problem_id;
  std::optional<NormalizedAnswer> predicted;
  bool correct = false;
  ExtractionSource extraction_source = ExtractionSource::none;
};

GradedResult make_graded_result(std::string problem_id, std::optional<NormalizedAnswer> predicted,
                                ExtractionSource source, const NormalizedAnswer& gold);

}  // namespace duprompt::grading
