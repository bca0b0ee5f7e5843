#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "dup/datasets.hpp"
#include "dup/grading.hpp"
#include "dup/llm_gateway.hpp"
#include "dup/run_config.hpp"
#include "dup/transcript.hpp"

namespace duprompt {

/// What every stage call of one problem shares.
struct StageContext {
  llm::Gateway& gateway;
  const RunConfig& config;
  const data::Problem& problem;
};

/// One stateless completion through the cache. The returned record carries
/// everything but `artifact`.
StageRecord call_stage(const StageContext& ctx, std::string stage, const std::string& model, std::string prompt,
                       double temperature, int sample);

struct Extraction {
  std::optional<NormalizedAnswer> answer;
  grading::ExtractionSource source = grading::ExtractionSource::none;
  StageRecord record;  // the extraction call
};

/// Asks the responder model for the bare answer at temperature 0 and
/// normalizes it; if that yields nothing, the rule-based extractor runs on
/// `reasoning`.
Extraction extract_answer(const StageContext& ctx, std::string_view reasoning, int sample);

/// Part of a single-call DUP-s response that holds the answer: from the last
/// line starting with "3." to the end, or the whole text if there is none.
std::string dup_s_answer_tail(std::string_view response);

}  // namespace duprompt
