#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dup/pipeline_steps.hpp"

namespace duprompt::sc {

struct Vote {
  int sample_index = 0;
  std::optional<NormalizedAnswer> answer;  // nullopt = extraction failed
};

using VoteSet = std::vector<Vote>;

/// Majority vote over successful votes, with answers compared by
/// grading::grade. Ties go to the answer seen first. Returns nullopt when
/// every vote failed; throws std::invalid_argument on an empty set.
std::optional<NormalizedAnswer> aggregate(const VoteSet& votes);

struct SampleOutcome {
  VoteSet votes;
  std::vector<grading::ExtractionSource> sources;  // parallel to votes
  std::optional<NormalizedAnswer> answer;
  grading::ExtractionSource source = grading::ExtractionSource::none;
  // Per sample: answer call then extraction call, in sample order.
  std::vector<StageRecord> records;
};

using ReasoningView = std::function<std::string(std::string_view response)>;

/// Runs config.n_samples answer completions of `answer_prompt` (concurrently
/// when more than one), extracts each and aggregates. Gateway errors
/// propagate after all samples have settled.
SampleOutcome run_sc(const StageContext& ctx, const std::string& answer_prompt, const ReasoningView& view = {});

}  // namespace duprompt::sc
