#include "dup/prompt_stages.hpp"

#include <algorithm>

namespace duprompt::prompts {
namespace {

void require_non_empty(std::string_view value, std::string_view what) {
  if (value.empty()) throw InvalidInputError(std::string(what) + " must be non-empty");
}

std::string join_lines(std::initializer_list<std::string_view> lines) {
  std::string out;
  for (auto line : lines) {
    if (!out.empty()) out.push_back('\n');
    out.append(line);
  }
  return out;
}

}  // namespace

std::string_view to_string(MethodVariant method) {
  switch (method) {
    case MethodVariant::dup: return "dup";
    case MethodVariant::dup_s: return "dup-s";
    case MethodVariant::zero_shot_cot: return "cot";
    case MethodVariant::last_letter_simplified: return "last-letter";
  }
  return "unknown";
}

MethodVariant parse_method(std::string_view name) {
  if (name == "dup") return MethodVariant::dup;
  if (name == "dup-s" || name == "dup_s") return MethodVariant::dup_s;
  if (name == "cot" || name == "zero-shot-cot" || name == "zero_shot_cot") return MethodVariant::zero_shot_cot;
  if (name == "last-letter" || name == "last_letter_simplified") return MethodVariant::last_letter_simplified;
  throw InvalidInputError("unknown method: " + std::string(name));
}

PromptTemplate::PromptTemplate(std::string name, std::string body, std::vector<std::string> slots)
    : name_(std::move(name)), body_(std::move(body)), slots_(std::move(slots)) {
  auto declared = slots_;
  std::sort(declared.begin(), declared.end());
  if (std::adjacent_find(declared.begin(), declared.end()) != declared.end())
    throw std::invalid_argument("template " + name_ + " declares a slot twice");
  auto used = markers(body_);
  std::sort(used.begin(), used.end());
  if (used != declared) throw std::invalid_argument("template " + name_ + " slots do not match its markers");
}

std::vector<std::string> PromptTemplate::markers(std::string_view body) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = body.find('{', pos)) != std::string_view::npos) {
    const auto close = body.find('}', pos + 1);
    if (close == std::string_view::npos) break;
    std::string name(body.substr(pos + 1, close - pos - 1));
    if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(std::move(name));
    pos = close + 1;
  }
  return out;
}

std::string PromptTemplate::render(const std::map<std::string, std::string, std::less<>>& values) const {
  std::string out;
  out.reserve(body_.size());
  std::size_t pos = 0;
  while (true) {
    const auto open = body_.find('{', pos);
    if (open == std::string::npos) break;
    const auto close = body_.find('}', open + 1);
    if (close == std::string::npos) break;
    out.append(body_, pos, open - pos);
    const std::string_view slot(body_.data() + open + 1, close - open - 1);
    const auto it = values.find(slot);
    if (it == values.end()) throw InvalidInputError("template " + name_ + ": slot '" + std::string(slot) + "' unbound");
    out.append(it->second);
    pos = close + 1;
  }
  out.append(body_, pos, std::string::npos);
  return out;
}

const PromptTemplate& core_question_template() {
  static const PromptTemplate t("core_question", "{question}\n" + std::string(kCoreQuestionInstruction),
                                {"question"});
  return t;
}

const PromptTemplate& info_extraction_template() {
  static const PromptTemplate t(
      "info_extraction",
      "{question}\n" + std::string(kInfoInstructionHead) + " {core_question}" + std::string(kInfoInstructionTail),
      {"question", "core_question"});
  return t;
}

const PromptTemplate& error_analysis_template() {
  static const PromptTemplate t(
      "error_analysis",
      "Question: {question}.\n"
      "Wrong Response: {wrong_answer}.\n"
      "Correct Response: {correct_answer}.\n"
      "Please judge which type of error it belongs to based on the above information:\n"
      "    1. Semantic Misunderstanding: semantic misunderstanding or lack of commonsense concepts.\n"
      "    2. Calculation error: errors occurred while performing a basic operation.\n"
      "    3. Step-missing errors: missing step and hallucination.\n"
      "Finally, please explain why this error falls into the category you select.",
      {"question", "wrong_answer", "correct_answer"});
  return t;
}

std::string render_core_question_prompt(std::string_view question) {
  require_non_empty(question, "question");
  return core_question_template().render({{"question", std::string(question)}});
}

std::string render_info_extraction_prompt(std::string_view question, std::string_view core_question) {
  require_non_empty(question, "question");
  require_non_empty(core_question, "core question");
  return info_extraction_template().render(
      {{"question", std::string(question)}, {"core_question", std::string(core_question)}});
}

std::string render_final_answer_prompt(std::string_view question, std::string_view core_question,
                                       std::string_view info, bool solve_instruction) {
  require_non_empty(question, "question");
  std::string out(question);
  if (!info.empty()) {
    out.push_back('\n');
    out.append(kHintPrefix);
    out.append(info);
  }
  if (!core_question.empty()) {
    out.push_back('\n');
    out.append(core_question);
  }
  if (solve_instruction) {
    out.push_back('\n');
    out.append(kSolveInstruction);
  }
  return out;
}

std::string render_dup_s_prompt(std::string_view question) {
  require_non_empty(question, "question");
  const std::string core = "1. " + std::string(kCoreQuestionInstruction);
  const std::string info = "2. " + std::string(kInfoInstructionHead) + std::string(kInfoInstructionTail);
  const std::string solve = "3. " + std::string(kSolveInstruction);
  return join_lines({question, core, info, solve});
}

std::string render_cot_prompt(std::string_view question) {
  require_non_empty(question, "question");
  return join_lines({question, kCotTrigger});
}

std::string render_last_letter_prompt(std::string_view question) {
  require_non_empty(question, "question");
  return join_lines({question, kLastLetterInstruction});
}

std::string render_answer_extraction_prompt(std::string_view reasoning_text, AnswerType answer_type) {
  require_non_empty(reasoning_text, "reasoning text");
  std::string_view instruction;
  switch (answer_type) {
    case AnswerType::number:
      instruction = "Read the reasoning below and output only the final numeric answer, written in arabic "
                    "numerals without units.";
      break;
    case AnswerType::option:
      instruction = "Read the reasoning below and output only the letter of the final answer choice, one of "
                    "A, B, C, D or E.";
      break;
    case AnswerType::yes_no:
      instruction = "Read the reasoning below and output only the final answer, either yes or no.";
      break;
    case AnswerType::string:
      instruction = "Read the reasoning below and output only the final answer string, without quotes or "
                    "explanation.";
      break;
  }
  return join_lines({instruction, "Reasoning:", reasoning_text});
}

std::string render_error_analysis_prompt(std::string_view question, std::string_view wrong,
                                         std::string_view correct) {
  require_non_empty(question, "question");
  require_non_empty(wrong, "wrong answer");
  require_non_empty(correct, "correct answer");
  return error_analysis_template().render({{"question", std::string(question)},
                                           {"wrong_answer", std::string(wrong)},
                                           {"correct_answer", std::string(correct)}});
}

}  // namespace duprompt::prompts
