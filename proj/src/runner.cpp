#include "dup/runner.hpp"

#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <mutex>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "dup/pipeline_steps.hpp"
#include "dup/sampling.hpp"
#include "dup/self_consistency.hpp"
#include "text_util.hpp"

namespace duprompt {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Produces the prompt for the answer stage, running stages 1 and 2 first
// when the method uses them.
std::string answer_prompt(const StageContext& ctx, Transcript& t) {
  const auto& q = ctx.problem.question;
  switch (t.method) {
    case MethodVariant::dup_s: return prompts::render_dup_s_prompt(q);
    case MethodVariant::zero_shot_cot: return prompts::render_cot_prompt(q);
    case MethodVariant::last_letter_simplified: return prompts::render_last_letter_prompt(q);
    case MethodVariant::dup: break;
  }
  const auto& stages = ctx.config.stages;
  const auto& model = ctx.config.stage_model();
  std::string core;
  std::string info;
  if (stages.stage1) {
    auto rec = call_stage(ctx, stage_tag::kCoreQuestion, model, prompts::render_core_question_prompt(q), 0.0, 0);
    core = std::string(text::trim(rec.response));
    rec.artifact = core;
    t.append(std::move(rec));
  }
  if (stages.stage2) {
    const std::string_view referent = stages.stage1 ? std::string_view(core) : std::string_view(q);
    auto rec = call_stage(ctx, stage_tag::kInfo, model, prompts::render_info_extraction_prompt(q, referent), 0.0, 0);
    info = std::string(text::trim(rec.response));
    rec.artifact = info;
    t.append(std::move(rec));
  }
  return prompts::render_final_answer_prompt(q, core, info, stages.stage3);
}

}  // namespace

Transcript run_problem(const data::Problem& problem, const RunConfig& config, llm::Gateway& gateway) {
  Transcript t;
  t.problem_id = problem.id;
  t.dataset = problem.dataset;
  t.method = config.effective_method();
  t.stages = config.stages;
  t.answer_type = problem.answer_type;
  t.gold_raw = problem.gold_raw;
  t.gold = problem.gold.to_text();
  t.graded.problem_id = problem.id;

  const StageContext ctx{gateway, config, problem};
  try {
    const auto prompt = answer_prompt(ctx, t);
    sc::ReasoningView view;
    if (t.method == MethodVariant::dup_s) view = [](std::string_view r) { return dup_s_answer_tail(r); };
    auto outcome = sc::run_sc(ctx, prompt, view);
    for (auto& rec : outcome.records) t.append(std::move(rec));
    for (std::size_t i = 0; i < outcome.votes.size(); ++i) {
      const auto& v = outcome.votes[i];
      t.votes.push_back({v.sample_index, v.answer ? std::optional(v.answer->to_text()) : std::nullopt,
                         outcome.sources[i]});
    }
    t.graded = grading::make_graded_result(problem.id, std::move(outcome.answer), outcome.source, problem.gold);
  } catch (const llm::GatewayError& e) {
    t.errors.push_back(e.what());
    spdlog::warn("{}: {}", problem.id, e.what());
  }
  return t;
}

std::vector<data::Problem> select_problems(const std::vector<data::Problem>& problems, const RunConfig& config) {
  if (!config.max_problems || *config.max_problems >= problems.size()) return problems;
  std::vector<data::Problem> out;
  for (auto i : seeded_subset(problems.size(), *config.max_problems, config.seed)) out.push_back(problems[i]);
  return out;
}

std::vector<Transcript> load_transcripts(const fs::path& out_dir) {
  std::vector<fs::path> files;
  const auto dir = out_dir / "transcripts";
  if (fs::is_directory(dir))
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<Transcript> out;
  for (const auto& f : files) out.push_back(Transcript::from_json(read_json(f)));
  return out;
}

namespace {

void check_or_write_config(const fs::path& out_dir, const json& config) {
  const auto path = out_dir / "run_config.json";
  if (!fs::exists(path)) {
    write_json_atomic(path, config);
    return;
  }
  const auto existing = read_json(path);
  if (existing != config)
    throw ConfigMismatchError(fmt::format("{} was written by a different run configuration:\n  existing {}\n  requested {}",
                                          path.string(), existing.dump(), config.dump()));
}

std::optional<Transcript> finished_transcript(const fs::path& path) {
  if (!fs::exists(path)) return std::nullopt;
  try {
    auto t = Transcript::from_json(read_json(path));
    if (t.ok()) return t;
  } catch (const std::exception& e) {
    spdlog::warn("ignoring unreadable transcript {}: {}", path.string(), e.what());
  }
  return std::nullopt;
}

}  // namespace

RunOutcome run_experiment(const std::vector<data::Problem>& problems, const RunConfig& config,
                          llm::Gateway& gateway, const RunControl& control) {
  config.validate();
  const auto started_at = utc_now();
  const auto selected = select_problems(problems, config);
  const auto config_json = config.to_json();
  const auto transcripts_dir = config.out_dir / "transcripts";
  fs::create_directories(transcripts_dir);
  check_or_write_config(config.out_dir, config_json);

  std::vector<std::optional<Transcript>> slots(selected.size());
  std::vector<std::size_t> pending;
  RunOutcome outcome;
  for (std::size_t i = 0; i < selected.size(); ++i) {
    slots[i] = finished_transcript(transcripts_dir / transcript_file_name(selected[i].id));
    if (slots[i])
      ++outcome.reused;
    else
      pending.push_back(i);
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> stopped{false};
  std::mutex done_mutex;
  auto worker = [&] {
    for (;;) {
      if (stopped.load()) return;
      if (control.should_stop && control.should_stop()) {
        stopped = true;
        return;
      }
      const auto n = next.fetch_add(1);
      if (n >= pending.size()) return;
      const auto i = pending[n];
      auto t = run_problem(selected[i], config, gateway);
      write_json_atomic(transcripts_dir / transcript_file_name(t.problem_id), t.to_json());
      std::lock_guard lock(done_mutex);
      if (control.on_problem_done) control.on_problem_done(t);
      slots[i] = std::move(t);
      ++outcome.executed;
    }
  };
  {
    const auto count = std::min<std::size_t>(static_cast<std::size_t>(config.workers), std::max<std::size_t>(pending.size(), 1));
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < count; ++w) pool.emplace_back(worker);
  }

  std::vector<Transcript> finished;
  for (auto& s : slots)
    if (s) finished.push_back(std::move(*s));
  outcome.complete = finished.size() == selected.size();

  outcome.report = Report::from_transcripts(finished);
  outcome.report.config = config_json;
  outcome.report.dataset = data::canonical_dataset_id(config.dataset);
  outcome.report.method = std::string(prompts::to_string(config.effective_method()));
  outcome.report.started_at = started_at;
  outcome.report.finished_at = utc_now();
  if (outcome.complete) {
    write_json_atomic(config.out_dir / "report.json", outcome.report.to_json());
    std::ofstream(config.out_dir / "report.txt", std::ios::binary | std::ios::trunc) << outcome.report.to_text();
  }
  return outcome;
}

}  // namespace duprompt
