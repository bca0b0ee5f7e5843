// Command-line front end: run, resume, compare, analyze-errors, recount.

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "dup/datasets.hpp"
#include "dup/error_analysis.hpp"
#include "dup/llm_gateway.hpp"
#include "dup/report.hpp"
#include "dup/runner.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kFailure = 1, kDataError = 3, kMismatch = 4, kInterrupted = 130 };

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted = true; }

// Where the problems and the model come from. Persisted next to the run so
// resume and analyze-errors can rebuild both without repeating flags.
struct Inputs {
  std::string data_file;
  std::string manifest;
  std::string answer_type;
  std::string cache_dir;
  std::string backend = "http";
  std::string mock_script;
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key_env = "OPENAI_API_KEY";
  int concurrency = 4;
  int max_retries = 5;
  double timeout_s = 120.0;

  json to_json() const {
    return {{"data_file", data_file},     {"manifest", manifest},       {"answer_type", answer_type},
            {"cache_dir", cache_dir},     {"backend", backend},         {"mock_script", mock_script},
            {"base_url", base_url},       {"api_key_env", api_key_env}, {"concurrency", concurrency},
            {"max_retries", max_retries}, {"timeout_s", timeout_s}};
  }
  void merge_from(const json& j) {
    data_file = j.value("data_file", data_file);
    manifest = j.value("manifest", manifest);
    answer_type = j.value("answer_type", answer_type);
    cache_dir = j.value("cache_dir", cache_dir);
    backend = j.value("backend", backend);
    mock_script = j.value("mock_script", mock_script);
    base_url = j.value("base_url", base_url);
    api_key_env = j.value("api_key_env", api_key_env);
    concurrency = j.value("concurrency", concurrency);
    max_retries = j.value("max_retries", max_retries);
    timeout_s = j.value("timeout_s", timeout_s);
  }
};

std::string absolute(const std::string& p) { return p.empty() ? p : fs::absolute(p).lexically_normal().string(); }

void add_gateway_flags(CLI::App* cmd, Inputs& in) {
  cmd->add_option("--backend", in.backend, "Model backend")->check(CLI::IsMember({"http", "mock"}));
  cmd->add_option("--mock-script", in.mock_script, "Scripted replies for --backend mock");
  cmd->add_option("--base-url", in.base_url, "Chat-completions base URL");
  cmd->add_option("--api-key-env", in.api_key_env, "Environment variable holding the API key");
  cmd->add_option("--concurrency", in.concurrency, "Maximum in-flight model calls")->check(CLI::PositiveNumber);
  cmd->add_option("--max-retries", in.max_retries, "Retries for transient failures")->check(CLI::NonNegativeNumber);
  cmd->add_option("--timeout", in.timeout_s, "Per-request timeout in seconds")->check(CLI::PositiveNumber);
  cmd->add_option("--cache-dir", in.cache_dir, "Response cache directory");
}

void add_data_flags(CLI::App* cmd, Inputs& in) {
  cmd->add_option("--manifest", in.manifest, "Dataset manifest (JSON)");
  cmd->add_option("--data-file", in.data_file, "Dataset file; overrides the manifest");
  cmd->add_option("--answer-type", in.answer_type, "Answer type for datasets outside the built-in list")
      ->check(CLI::IsMember({"number", "option", "yes_no", "string"}));
}

std::unique_ptr<duprompt::llm::Gateway> build_gateway(const Inputs& in) {
  duprompt::llm::ProviderConfig pc;
  pc.backend = in.backend == "mock" ? duprompt::llm::BackendKind::mock : duprompt::llm::BackendKind::http;
  pc.base_url = in.base_url;
  pc.mock_script = in.mock_script;
  pc.max_concurrency = in.concurrency;
  pc.max_retries = in.max_retries;
  pc.timeout = std::chrono::milliseconds(static_cast<long long>(in.timeout_s * 1000.0));
  if (pc.backend == duprompt::llm::BackendKind::http) {
    const char* key = std::getenv(in.api_key_env.c_str());
    if (!key || !*key) throw std::invalid_argument("environment variable " + in.api_key_env + " is not set");
    pc.auth_token = key;
  }
  std::optional<fs::path> cache;
  if (!in.cache_dir.empty()) cache = in.cache_dir;
  return duprompt::llm::make_gateway(pc, cache);
}

std::vector<duprompt::data::Problem> load_problems(const Inputs& in, const std::string& dataset) {
  duprompt::data::LoadOptions options;
  fs::path file = in.data_file;
  if (file.empty()) {
    if (in.manifest.empty()) throw std::invalid_argument("pass --data-file or --manifest");
    const auto entries = duprompt::data::load_manifest(in.manifest);
    const auto it = entries.find(duprompt::data::canonical_dataset_id(dataset));
    if (it == entries.end()) throw duprompt::data::DatasetError("dataset '" + dataset + "' is not in " + in.manifest);
    file = it->second.path;
    options = it->second.options;
  }
  if (!in.answer_type.empty()) options.answer_type = duprompt::parse_answer_type(in.answer_type);
  auto loaded = duprompt::data::load_dataset(file, dataset, options);
  return std::move(loaded.problems);
}

int execute(const std::vector<duprompt::data::Problem>& problems, const duprompt::RunConfig& config, const Inputs& in) {
  auto gateway = build_gateway(in);
  std::signal(SIGINT, on_sigint);
  duprompt::RunControl control;
  control.should_stop = [] { return g_interrupted.load(); };
  const auto outcome = duprompt::run_experiment(problems, config, *gateway, control);
  if (!outcome.complete) {
    fmt::print(stderr, "interrupted after {} problems; run `dup resume --out-dir {}` to continue\n",
               outcome.report.total, config.out_dir.string());
    return kInterrupted;
  }
  fmt::print("{}", outcome.report.to_text());
  fmt::print("ran {} problems, reused {}; output in {}\n", outcome.executed, outcome.reused, config.out_dir.string());
  return kOk;
}

duprompt::Report read_report(const fs::path& dir) { return duprompt::Report::from_json(duprompt::read_json(dir / "report.json")); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Staged prompting experiments over reasoning benchmarks"};
  app.require_subcommand(1);

  // run
  Inputs run_in;
  duprompt::RunConfig cfg;
  std::string method = "dup";
  std::string stages = "1,2,3";
  std::string extractor_model;
  std::string out_dir;
  std::string system_prompt;
  std::size_t max_problems = 0;
  int workers = 0;
  auto* run = app.add_subcommand("run", "Run a method over a dataset");
  run->add_option("--dataset", cfg.dataset, "Dataset id (gsm8k, svamp, aqua, ...)")->required();
  add_data_flags(run, run_in);
  run->add_option("--method", method, "Prompting method")->check(CLI::IsMember({"dup", "dup-s", "cot", "last-letter"}));
  run->add_option("--stages", stages, "Enabled DUP stages, a subset of 1,2,3");
  bool keep_full_dup = false;
  run->add_flag("--no-auto-last-letter", keep_full_dup, "Keep full DUP on last_letters");
  run->add_option("--model", cfg.model, "Responder model");
  run->add_option("--extractor-model", extractor_model, "Model for stages 1 and 2");
  run->add_option("--temperature", cfg.temperature, "Answer-stage temperature")->check(CLI::NonNegativeNumber);
  run->add_option("--self-consistency", cfg.n_samples, "Samples per problem")->check(CLI::PositiveNumber);
  run->add_option("--max-tokens", cfg.max_tokens, "Completion token limit")->check(CLI::PositiveNumber);
  run->add_option("--max-problems", max_problems, "Seeded subsample size (0 = all)");
  run->add_option("--seed", cfg.seed, "Subsample seed");
  run->add_option("--system-prompt", system_prompt, "Optional system message");
  run->add_option("--workers", workers, "Problems in parallel (default: --concurrency)");
  run->add_option("--out-dir", out_dir, "Output directory")->required();
  add_gateway_flags(run, run_in);

  // resume
  std::string resume_dir;
  Inputs resume_in;
  auto* resume = app.add_subcommand("resume", "Finish an interrupted run");
  resume->add_option("--out-dir", resume_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  add_data_flags(resume, resume_in);
  add_gateway_flags(resume, resume_in);

  // compare
  std::vector<std::string> baseline_dirs, candidate_dirs;
  bool compare_json = false;
  auto* compare = app.add_subcommand("compare", "Accuracy deltas between two sets of runs");
  compare->add_option("--baseline", baseline_dirs, "Baseline run directories")->required()->check(CLI::ExistingDirectory);
  compare->add_option("--candidate", candidate_dirs, "Candidate run directories")->required()->check(CLI::ExistingDirectory);
  compare->add_flag("--json", compare_json, "Print JSON instead of a table");

  // analyze-errors
  std::vector<std::string> analyze_dirs;
  std::size_t sample_k = 300;
  std::uint64_t analyze_seed = 0;
  std::string judge_model;
  Inputs analyze_in;
  auto* analyze = app.add_subcommand("analyze-errors", "Classify failures with a judge model");
  analyze->add_option("--out-dir", analyze_dirs, "Run directories")->required()->check(CLI::ExistingDirectory);
  analyze->add_option("--sample", sample_k, "Problems to sample per run");
  analyze->add_option("--seed", analyze_seed, "Sampling seed");
  analyze->add_option("--judge-model", judge_model, "Judge model (default: the run's model)");
  add_data_flags(analyze, analyze_in);
  add_gateway_flags(analyze, analyze_in);

  // recount
  std::string recount_dir;
  auto* recount = app.add_subcommand("recount", "Re-grade transcripts and check report.json");
  recount->add_option("--out-dir", recount_dir, "Run directory")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int printed = app.exit(e);
    return printed == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      cfg.method = duprompt::prompts::parse_method(method);
      cfg.auto_last_letter = !keep_full_dup;
      cfg.stages = duprompt::StageConfig::parse(stages);
      if (!extractor_model.empty()) cfg.extractor_model = extractor_model;
      if (max_problems > 0) cfg.max_problems = max_problems;
      if (!system_prompt.empty()) cfg.system_prompt = system_prompt;
      cfg.workers = workers > 0 ? workers : run_in.concurrency;
      cfg.out_dir = out_dir;
      if (run_in.cache_dir.empty()) run_in.cache_dir = (fs::path(out_dir) / "cache").string();
      run_in.data_file = absolute(run_in.data_file);
      run_in.manifest = absolute(run_in.manifest);
      run_in.mock_script = absolute(run_in.mock_script);
      run_in.cache_dir = absolute(run_in.cache_dir);
      cfg.validate();
      const auto problems = load_problems(run_in, cfg.dataset);
      fs::create_directories(cfg.out_dir);
      duprompt::write_json_atomic(cfg.out_dir / "inputs.json", run_in.to_json());
      return execute(problems, cfg, run_in);
    }

    if (*resume) {
      const fs::path dir = resume_dir;
      auto config = duprompt::RunConfig::from_json(duprompt::read_json(dir / "run_config.json"));
      config.out_dir = dir;
      Inputs in;
      if (fs::exists(dir / "inputs.json")) in.merge_from(duprompt::read_json(dir / "inputs.json"));
      // Flags given on the command line win over the stored inputs.
      const Inputs defaults;
      auto override_str = [](std::string& dst, const std::string& flag, const std::string& def) {
        if (flag != def) dst = flag;
      };
      override_str(in.data_file, absolute(resume_in.data_file), defaults.data_file);
      override_str(in.manifest, absolute(resume_in.manifest), defaults.manifest);
      override_str(in.answer_type, resume_in.answer_type, defaults.answer_type);
      override_str(in.cache_dir, absolute(resume_in.cache_dir), defaults.cache_dir);
      override_str(in.backend, resume_in.backend, defaults.backend);
      override_str(in.mock_script, absolute(resume_in.mock_script), defaults.mock_script);
      override_str(in.base_url, resume_in.base_url, defaults.base_url);
      override_str(in.api_key_env, resume_in.api_key_env, defaults.api_key_env);
      if (resume_in.concurrency != defaults.concurrency) in.concurrency = resume_in.concurrency;
      if (resume_in.max_retries != defaults.max_retries) in.max_retries = resume_in.max_retries;
      if (resume_in.timeout_s != defaults.timeout_s) in.timeout_s = resume_in.timeout_s;
      config.workers = in.concurrency;
      const auto problems = load_problems(in, config.dataset);
      return execute(problems, config, in);
    }

    if (*compare) {
      std::vector<duprompt::Report> base, cand;
      for (const auto& d : baseline_dirs) base.push_back(read_report(d));
      for (const auto& d : candidate_dirs) cand.push_back(read_report(d));
      const auto table = duprompt::compare_runs(base, cand);
      if (compare_json)
        fmt::print("{}\n", table.to_json().dump(2));
      else
        fmt::print("{}", table.to_text());
      return kOk;
    }

    if (*analyze) {
      std::vector<duprompt::errors::ErrorReport> reports;
      for (const auto& d : analyze_dirs) {
        const fs::path dir = d;
        const auto config = duprompt::RunConfig::from_json(duprompt::read_json(dir / "run_config.json"));
        Inputs in;
        if (fs::exists(dir / "inputs.json")) in.merge_from(duprompt::read_json(dir / "inputs.json"));
        const Inputs defaults;
        if (!analyze_in.data_file.empty()) in.data_file = absolute(analyze_in.data_file);
        if (!analyze_in.manifest.empty()) in.manifest = absolute(analyze_in.manifest);
        if (analyze_in.backend != defaults.backend) in.backend = analyze_in.backend;
        if (!analyze_in.mock_script.empty()) in.mock_script = absolute(analyze_in.mock_script);
        if (!analyze_in.cache_dir.empty()) in.cache_dir = absolute(analyze_in.cache_dir);
        if (analyze_in.base_url != defaults.base_url) in.base_url = analyze_in.base_url;
        if (analyze_in.api_key_env != defaults.api_key_env) in.api_key_env = analyze_in.api_key_env;

        const auto transcripts = duprompt::load_transcripts(dir);
        const auto problems = duprompt::select_problems(load_problems(in, config.dataset), config);
        auto gateway = build_gateway(in);
        duprompt::errors::JudgeOptions judge;
        judge.model = judge_model.empty() ? config.model : judge_model;
        auto report = duprompt::errors::sample_and_analyze(problems, transcripts, std::min(sample_k, problems.size()),
                                                      analyze_seed, *gateway, judge);
        duprompt::write_json_atomic(dir / "error_report.json", report.to_json());
        reports.push_back(std::move(report));
      }
      const auto table = duprompt::errors::error_table(reports);
      fmt::print("{}", table);
      if (analyze_dirs.size() == 1) std::ofstream(fs::path(analyze_dirs.front()) / "error_report.txt") << table;
      return kOk;
    }

    if (*recount) {
      const auto r = duprompt::recount(recount_dir);
      fmt::print("recount: {}/{} correct, accuracy {:.1f}\n", r.correct, r.total, r.accuracy);
      if (!r.report_found) {
        fmt::print("no report.json to check against\n");
        return kOk;
      }
      if (r.matches) {
        fmt::print("report.json agrees\n");
        return kOk;
      }
      fmt::print("report.json disagrees");
      if (!r.mismatched_ids.empty()) {
        fmt::print(" on:");
        for (const auto& id : r.mismatched_ids) fmt::print(" {}", id);
      }
      fmt::print("\n");
      return kMismatch;
    }
  } catch (const duprompt::data::DatasetError& e) {
    fmt::print(stderr, "dataset error: {}\n", e.what());
    return kDataError;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kFailure;
  }
  return kOk;
}
