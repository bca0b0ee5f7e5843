#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <vector>

#include "dup/datasets.hpp"
#include "dup/llm_gateway.hpp"
#include "dup/report.hpp"
#include "dup/run_config.hpp"
#include "dup/transcript.hpp"

namespace duprompt {

/// Runs the configured method on one problem. Gateway failures are recorded
/// in `errors` and leave the problem graded incorrect; they never throw.
Transcript run_problem(const data::Problem& problem, const RunConfig& config, llm::Gateway& gateway);

/// max_problems entries chosen by a seeded shuffle, returned in file order.
/// Without max_problems (or when it covers the set) all problems are kept.
std::vector<data::Problem> select_problems(const std::vector<data::Problem>& problems, const RunConfig& config);

/// out_dir already holds a run made with different experiment settings.
class ConfigMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunControl {
  // Polled before each problem starts; true stops scheduling new ones.
  std::function<bool()> should_stop;
  // Called after each transcript is written.
  std::function<void(const Transcript&)> on_problem_done;
};

struct RunOutcome {
  Report report;
  bool complete = false;
  std::size_t executed = 0;  // problems run now (not loaded from disk)
  std::size_t reused = 0;    // finished transcripts found in out_dir
};

/// Runs every selected problem that lacks a finished transcript in
/// out_dir/transcripts, writing each as it completes. Writes
/// out_dir/run_config.json on the first run and refuses a differing one
/// later. report.json and report.txt are written once all problems are done.
RunOutcome run_experiment(const std::vector<data::Problem>& problems, const RunConfig& config,
                          llm::Gateway& gateway, const RunControl& control = {});

/// Transcripts in out_dir/transcripts, sorted by file name.
std::vector<Transcript> load_transcripts(const std::filesystem::path& out_dir);

}  // namespace duprompt
