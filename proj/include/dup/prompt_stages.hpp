#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dup/answer.hpp"

namespace duprompt::prompts {

/// Thrown when a renderer precondition fails (empty question, empty slot value).
class InvalidInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class MethodVariant { dup, dup_s, zero_shot_cot, last_letter_simplified };

std::string_view to_string(MethodVariant method);
/// Accepts "dup", "dup-s", "cot", "last-letter" (and the underscore spellings).
MethodVariant parse_method(std::string_view name);

// Stage instructions. A shorter core-question wording without the second
// "extract" also circulates; this one is canonical and frozen in goldens.
inline constexpr std::string_view kCoreQuestionInstruction =
    "Please extract core question, only extract the most comprehensive and detailed one!";
inline constexpr std::string_view kInfoInstructionHead =
    "Note: Please extract the problem-solving information related to the core question";
inline constexpr std::string_view kInfoInstructionTail =
    ", only extract the most useful information, list them one by one!";
inline constexpr std::string_view kSolveInstruction =
    "Please understand the Hint and question information, then solve the problem step by step "
    "and show the answer.";
inline constexpr std::string_view kHintPrefix = "Hint: ";
inline constexpr std::string_view kCotTrigger = "Let's think step by step";
inline constexpr std::string_view kLastLetterInstruction =
    "Please accurately understand the question useful information and solve the question step "
    "by step.";

/// A prompt body with `{slot}` markers. Rendering substitutes in a single
/// pass, so slot values are never re-scanned for markers.
class PromptTemplate {
 public:
  /// Throws std::invalid_argument unless the markers in `body` and `slots`
  /// name the same set and `slots` has no duplicates.
  PromptTemplate(std::string name, std::string body, std::vector<std::string> slots);

  const std::string& name() const { return name_; }
  const std::string& body() const { return body_; }
  const std::vector<std::string>& slots() const { return slots_; }

  /// Throws InvalidInputError if a slot is unbound.
  std::string render(const std::map<std::string, std::string, std::less<>>& values) const;

  /// Slot names referenced by `{name}` markers in `body`, in first-use order.
  static std::vector<std::string> markers(std::string_view body);

 private:
  std::string name_;
  std::string body_;
  std::vector<std::string> slots_;
};

const PromptTemplate& core_question_template();
const PromptTemplate& info_extraction_template();
const PromptTemplate& error_analysis_template();

std::string render_core_question_prompt(std::string_view question);

std::string render_info_extraction_prompt(std::string_view question, std::string_view core_question);

/// Question, then "Hint: <info>", then the core question, then the solve
/// instruction. An empty `core_question` or `info` drops its line; so does
/// `solve_instruction == false`. With all three dropped the result is the
/// bare question.
std::string render_final_answer_prompt(std::string_view question, std::string_view core_question,
                                       std::string_view info, bool solve_instruction = true);

/// Single-call variant: the three stage instructions as numbered lines.
std::string render_dup_s_prompt(std::string_view question);

std::string render_cot_prompt(std::string_view question);

std::string render_last_letter_prompt(std::string_view question);

std::string render_answer_extraction_prompt(std::string_view reasoning_text, AnswerType answer_type);

std::string render_error_analysis_prompt(std::string_view question, std::string_view wrong,
                                         std::string_view correct);

}  // namespace duprompt::prompts
