#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dup/grading.hpp"
#include "dup/llm_gateway.hpp"
#include "dup/transcript.hpp"
#include "json.hpp"

namespace duprompt {

/// 100 * correct / total rounded half away from zero to one decimal.
double accuracy_percent(std::size_t correct, std::size_t total);
double round1(double value);

struct ProblemResult {
  std::string problem_id;
  std::string gold;
  std::optional<std::string> predicted;
  bool correct = false;
  grading::ExtractionSource source = grading::ExtractionSource::none;
  bool error = false;
};

struct Report {
  nlohmann::json config;  // RunConfig::to_json()
  std::string dataset;
  std::string method;
  std::string started_at;
  std::string finished_at;
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t errored = 0;
  double accuracy = 0.0;      // percent, one decimal
  double accuracy_raw = 0.0;  // correct / total
  std::size_t calls = 0;
  llm::Usage usage;
  std::vector<ProblemResult> results;

  /// Builds everything except config and timestamps from transcripts.
  static Report from_transcripts(const std::vector<Transcript>& transcripts);

  /// Timestamps live under "timestamps" so callers can drop them in one step.
  nlohmann::json to_json() const;
  static Report from_json(const nlohmann::json& j);
  std::string to_text() const;
};

class ComparisonError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DeltaRow {
  std::string dataset;
  double baseline = 0.0;
  double candidate = 0.0;
  double delta = 0.0;
};

struct DeltaTable {
  std::string baseline_method;
  std::string candidate_method;
  std::vector<DeltaRow> rows;  // sorted by dataset
  double baseline_avg = 0.0;
  double candidate_avg = 0.0;
  double delta_avg = 0.0;

  nlohmann::json to_json() const;
  /// Two method rows with one column per dataset, then Avg. and Delta.
  std::string to_text() const;
};

/// Pairs reports by dataset. Per-dataset deltas are candidate - baseline
/// rounded to one decimal; averages are unweighted means of the per-dataset
/// accuracies. Throws ComparisonError when the dataset sets or the problem
/// ids of a pair differ, naming the symmetric difference.
DeltaTable compare_runs(std::span<const Report> baseline, std::span<const Report> candidate);

struct RecountResult {
  std::size_t total = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  // Report said otherwise (empty when no report.json exists).
  std::vector<std::string> mismatched_ids;
  bool report_found = false;
  bool matches = true;
};

/// Re-grades every transcript under out_dir/transcripts from its stored
/// prediction and raw gold label, then checks report.json if present.
RecountResult recount(const std::filesystem::path& out_dir);

}  // namespace duprompt
