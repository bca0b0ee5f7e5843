#include "dup/error_analysis.hpp"

#include <future>
#include <map>
#include <stdexcept>

#include <fmt/format.h>

#include "dup/prompt_stages.hpp"
#include "dup/sampling.hpp"
#include "text_util.hpp"

namespace duprompt::errors {

using nlohmann::json;

std::string_view to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::semantic_misunderstanding: return "SEMANTIC_MISUNDERSTANDING";
    case ErrorCategory::calculation_error: return "CALCULATION_ERROR";
    case ErrorCategory::step_missing: return "STEP_MISSING";
    case ErrorCategory::unclassified: return "UNCLASSIFIED";
  }
  return "UNCLASSIFIED";
}

std::string_view short_label(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::semantic_misunderstanding: return "SM";
    case ErrorCategory::calculation_error: return "CE";
    case ErrorCategory::step_missing: return "SE";
    case ErrorCategory::unclassified: return "UN";
  }
  return "UN";
}

ErrorCategory parse_category(std::string_view judge_text) noexcept {
  static constexpr std::pair<std::string_view, ErrorCategory> kNeedles[] = {
      {"semantic misunderstanding", ErrorCategory::semantic_misunderstanding},
      {"1. semantic", ErrorCategory::semantic_misunderstanding},
      {"calculation error", ErrorCategory::calculation_error},
      {"2. calculation", ErrorCategory::calculation_error},
      {"step-missing", ErrorCategory::step_missing},
      {"step missing", ErrorCategory::step_missing},
      {"3. step", ErrorCategory::step_missing},
  };
  try {
    const auto lowered = text::lower(judge_text);
    auto best = std::string::npos;
    auto category = ErrorCategory::unclassified;
    for (const auto& [needle, cat] : kNeedles) {
      const auto pos = lowered.find(needle);
      if (pos < best) {
        best = pos;
        category = cat;
      }
    }
    return category;
  } catch (...) {
    return ErrorCategory::unclassified;
  }
}

Classification classify_failure(const data::Problem& problem, std::string_view wrong_response,
                                std::string_view correct_answer, llm::Gateway& gateway, const JudgeOptions& options) {
  Classification c;
  c.problem_id = problem.id;
  c.judge_prompt = prompts::render_error_analysis_prompt(problem.question, wrong_response, correct_answer);
  llm::ChatRequest req;
  req.model = options.model;
  req.messages.push_back({llm::Role::user, c.judge_prompt});
  req.max_tokens = options.max_tokens;
  req.label = {stage_tag::kJudge, problem.id, 0};
  try {
    c.judge_reply = gateway.complete_cached(req).content;
    c.category = parse_category(c.judge_reply);
  } catch (const llm::GatewayError& e) {
    c.error = e.what();
  }
  return c;
}

namespace {

std::string last_answer_response(const Transcript& t) {
  for (auto it = t.records.rbegin(); it != t.records.rend(); ++it)
    if (it->stage == stage_tag::kAnswer) return it->response;
  return {};
}

}  // namespace

json ErrorReport::to_json() const {
  json counts_json = json::object();
  for (auto c : kAllCategories) counts_json[std::string(to_string(c))] = count(c);
  json items_json = json::array();
  for (const auto& i : items) {
    items_json.push_back({{"problem_id", i.problem_id},
                          {"category", std::string(to_string(i.category))},
                          {"judge_reply", i.judge_reply},
                          {"error", i.error ? json(*i.error) : json(nullptr)}});
  }
  return json{{"dataset", dataset},           {"method", method},
              {"counts", std::move(counts_json)}, {"total_failures", total_failures},
              {"sample_size", sample_size},   {"items", std::move(items_json)}};
}

ErrorReport sample_and_analyze(const std::vector<data::Problem>& problems, const std::vector<Transcript>& transcripts,
                               std::size_t k, std::uint64_t seed, llm::Gateway& gateway,
                               const JudgeOptions& options) {
  if (k > problems.size())
    throw std::invalid_argument(fmt::format("sample size {} exceeds {} problems", k, problems.size()));

  std::map<std::string_view, const Transcript*> by_id;
  for (const auto& t : transcripts) by_id.emplace(t.problem_id, &t);

  ErrorReport report;
  report.sample_size = static_cast<int>(k);
  if (!problems.empty()) report.dataset = problems.front().dataset;
  if (!transcripts.empty()) report.method = std::string(prompts::to_string(transcripts.front().method));

  struct Failure {
    const data::Problem* problem;
    const Transcript* transcript;
  };
  std::vector<Failure> failures;
  for (auto index : seeded_subset(problems.size(), k, seed)) {
    const auto& p = problems[index];
    const auto found = by_id.find(p.id);
    if (found == by_id.end()) throw std::invalid_argument("no transcript for sampled problem " + p.id);
    if (!found->second->graded.correct) failures.push_back({&p, found->second});
  }

  std::vector<std::future<Classification>> pending;
  for (const auto& f : failures) {
    pending.push_back(std::async(std::launch::async, [&gateway, &options, f] {
      const auto wrong = last_answer_response(*f.transcript);
      if (wrong.empty()) {
        Classification c;
        c.problem_id = f.problem->id;
        c.error = "no model response recorded";
        return c;
      }
      return classify_failure(*f.problem, wrong, f.transcript->gold, gateway, options);
    }));
  }
  for (auto& p : pending) {
    auto c = p.get();
    ++report.counts[static_cast<std::size_t>(c.category)];
    ++report.total_failures;
    report.items.push_back(std::move(c));
  }
  return report;
}

std::string error_table(std::span<const ErrorReport> reports) {
  std::size_t width = 6;
  for (const auto& r : reports) width = std::max(width, r.method.size());
  std::string out = fmt::format("{:<{}}  {:>4}  {:>4}  {:>4}  {:>4}  {:>8}  {:>6}\n", "Method", width, "SM", "CE",
                                "SE", "UN", "Failures", "Sample");
  for (const auto& r : reports) {
    out += fmt::format("{:<{}}  {:>4}  {:>4}  {:>4}  {:>4}  {:>8}  {:>6}\n", r.method, width,
                       r.count(ErrorCategory::semantic_misunderstanding), r.count(ErrorCategory::calculation_error),
                       r.count(ErrorCategory::step_missing), r.count(ErrorCategory::unclassified), r.total_failures,
                       r.sample_size);
  }
  return out;
}

}  // namespace duprompt::errors
