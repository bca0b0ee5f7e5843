#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dup/datasets.hpp"
#include "dup/llm_gateway.hpp"
#include "dup/transcript.hpp"
#include "json.hpp"

namespace duprompt::errors {

enum class ErrorCategory { semantic_misunderstanding, calculation_error, step_missing, unclassified };

inline constexpr std::array<ErrorCategory, 4> kAllCategories{
    ErrorCategory::semantic_misunderstanding, ErrorCategory::calculation_error, ErrorCategory::step_missing,
    ErrorCategory::unclassified};

/// "SEMANTIC_MISUNDERSTANDING", ...
std::string_view to_string(ErrorCategory category);
/// "SM", "CE", "SE", "UN".
std::string_view short_label(ErrorCategory category);

/// Case-insensitive search for the category names ("semantic
/// misunderstanding", "calculation error", "step-missing"/"step missing")
/// and the numbered forms "1. semantic", "2. calculation", "3. step". The
/// match that starts earliest wins; nothing found gives unclassified.
ErrorCategory parse_category(std::string_view judge_text) noexcept;

struct JudgeOptions {
  std::string model = "gpt-3.5-turbo";
  int max_tokens = 1024;
};

struct Classification {
  std::string problem_id;
  ErrorCategory category = ErrorCategory::unclassified;
  std::string judge_prompt;
  std::string judge_reply;
  std::optional<std::string> error;  // gateway failure or missing response
};

/// Judge call at temperature 0. Gateway errors give unclassified with the
/// cause in `error`.
Classification classify_failure(const data::Problem& problem, std::string_view wrong_response,
                                std::string_view correct_answer, llm::Gateway& gateway,
                                const JudgeOptions& options = {});

struct ErrorReport {
  std::string dataset;
  std::string method;
  std::array<int, 4> counts{};  // indexed like kAllCategories
  int total_failures = 0;
  int sample_size = 0;
  std::vector<Classification> items;

  int count(ErrorCategory c) const { return counts[static_cast<std::size_t>(c)]; }
  nlohmann::json to_json() const;
};

/// Draws k problems with a seeded shuffle, classifies the ones whose
/// transcript is graded incorrect, and folds the counts. Throws
/// std::invalid_argument when k exceeds the problem count or a sampled
/// problem has no transcript.
ErrorReport sample_and_analyze(const std::vector<data::Problem>& problems, const std::vector<Transcript>& transcripts,
                               std::size_t k, std::uint64_t seed, llm::Gateway& gateway,
                               const JudgeOptions& options = {});

/// One row per report: method, SM, CE, SE, UN, failures, sample.
std::string error_table(std::span<const ErrorReport> reports);

}  // namespace duprompt::errors
