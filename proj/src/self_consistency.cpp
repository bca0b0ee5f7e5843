#include "dup/self_consistency.hpp"

#include <exception>
#include <future>
#include <stdexcept>

namespace duprompt::sc {

std::optional<NormalizedAnswer> aggregate(const VoteSet& votes) {
  if (votes.empty()) throw std::invalid_argument("aggregate: empty vote set");

  struct Cluster {
    const NormalizedAnswer* representative;
    int count;
  };
  // Clusters are created in order of first occurrence, so a strict '>' scan
  // below resolves ties toward the earliest answer.
  std::vector<Cluster> clusters;
  for (const auto& v : votes) {
    if (!v.answer) continue;
    bool merged = false;
    for (auto& c : clusters) {
      if (grading::grade(*v.answer, *c.representative)) {
        ++c.count;
        merged = true;
        break;
      }
    }
    if (!merged) clusters.push_back({&*v.answer, 1});
  }
  if (clusters.empty()) return std::nullopt;

  const Cluster* best = &clusters.front();
  for (const auto& c : clusters)
    if (c.count > best->count) best = &c;
  return *best->representative;
}

namespace {

struct Sample {
  StageRecord answer;
  Extraction extraction;
};

Sample run_one(const StageContext& ctx, const std::string& prompt, const ReasoningView& view, int k) {
  Sample s{call_stage(ctx, stage_tag::kAnswer, ctx.config.model, prompt, ctx.config.temperature, k), {}};
  const auto reasoning = view ? view(s.answer.response) : s.answer.response;
  s.extraction = extract_answer(ctx, reasoning, k);
  s.answer.artifact = s.extraction.answer ? s.extraction.answer->to_text() : std::string{};
  return s;
}

}  // namespace

SampleOutcome run_sc(const StageContext& ctx, const std::string& answer_prompt, const ReasoningView& view) {
  const int n = ctx.config.n_samples;
  if (n < 1) throw std::invalid_argument("run_sc: n_samples must be >= 1");

  std::vector<Sample> samples;
  if (n == 1) {
    samples.push_back(run_one(ctx, answer_prompt, view, 0));
  } else {
    std::vector<std::future<Sample>> pending;
    for (int k = 0; k < n; ++k)
      pending.push_back(std::async(std::launch::async, run_one, std::cref(ctx), std::cref(answer_prompt),
                                   std::cref(view), k));
    std::exception_ptr first_error;
    for (auto& f : pending) {
      try {
        samples.push_back(f.get());
      } catch (...) {
        if (!first_error) first_error = std::current_exception();
      }
    }
    if (first_error) std::rethrow_exception(first_error);
  }

  SampleOutcome out;
  for (int k = 0; k < n; ++k) {
    auto& s = samples[static_cast<std::size_t>(k)];
    out.votes.push_back({k, s.extraction.answer});
    out.sources.push_back(s.extraction.source);
    out.records.push_back(std::move(s.answer));
    out.records.push_back(std::move(s.extraction.record));
  }
  out.answer = aggregate(out.votes);
  if (out.answer) {
    for (std::size_t i = 0; i < out.votes.size(); ++i) {
      if (out.votes[i].answer && grading::grade(*out.votes[i].answer, *out.answer)) {
        out.source = out.sources[i];
        break;
      }
    }
  }
  return out;
}

}  // namespace duprompt::sc
