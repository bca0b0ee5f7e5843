#include "dup/pipeline_steps.hpp"

#include <chrono>

#include "text_util.hpp"

namespace duprompt {

StageRecord call_stage(const StageContext& ctx, std::string stage, const std::string& model, std::string prompt,
                       double temperature, int sample) {
  llm::ChatRequest req;
  req.model = model;
  if (ctx.config.system_prompt) req.messages.push_back({llm::Role::system, *ctx.config.system_prompt});
  req.messages.push_back({llm::Role::user, prompt});
  req.temperature = temperature;
  req.max_tokens = ctx.config.max_tokens;
  req.sample_index = temperature > 0.0 ? sample : 0;
  req.label = {stage, ctx.problem.id, sample};

  const auto start = std::chrono::steady_clock::now();
  auto resp = ctx.gateway.complete_cached(req);
  const std::chrono::duration<double, std::milli> took = std::chrono::steady_clock::now() - start;

  StageRecord rec;
  rec.stage = std::move(stage);
  rec.sample = sample;
  rec.model = model;
  rec.prompt = std::move(prompt);
  rec.response = std::move(resp.content);
  rec.cached = resp.cached;
  rec.duration_ms = took.count();
  rec.usage = resp.usage;
  return rec;
}

Extraction extract_answer(const StageContext& ctx, std::string_view reasoning, int sample) {
  const auto type = ctx.problem.answer_type;
  Extraction out;
  out.record = call_stage(ctx, stage_tag::kExtract, ctx.config.model,
                          prompts::render_answer_extraction_prompt(reasoning, type), 0.0, sample);
  if (auto a = grading::normalize(out.record.response, type)) {
    out.answer = std::move(a);
    out.source = grading::ExtractionSource::llm;
  } else if (auto r = grading::extract_rule_based(reasoning, type)) {
    out.answer = std::move(r);
    out.source = grading::ExtractionSource::rule_fallback;
  }
  if (out.answer) out.record.artifact = out.answer->to_text();
  return out;
}

std::string dup_s_answer_tail(std::string_view response) {
  std::size_t found = std::string_view::npos;
  std::size_t pos = 0;
  while (pos <= response.size()) {
    const auto eol = std::min(response.find('\n', pos), response.size());
    const auto line = text::trim(response.substr(pos, eol - pos));
    if (line.starts_with("3.")) found = pos;
    pos = eol + 1;
  }
  if (found == std::string_view::npos) return std::string(response);
  return std::string(response.substr(found));
}

}  // namespace duprompt
