#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dup/datasets.hpp"
#include "dup/grading.hpp"
#include "dup/llm_gateway.hpp"
#include "dup/run_config.hpp"
#include "json.hpp"

namespace duprompt {

namespace stage_tag {
inline constexpr const char* kCoreQuestion = "core_question";
inline constexpr const char* kInfo = "info";
inline constexpr const char* kAnswer = "answer";
inline constexpr const char* kExtract = "extract";
inline constexpr const char* kJudge = "judge";
}  // namespace stage_tag

/// One model call as it happened.
struct StageRecord {
  std::string stage;
  int sample = 0;
  std::string model;
  std::string prompt;
  std::string response;
  // What the pipeline took from the response (core question, info list,
  // normalized answer text). Empty when nothing was parsed.
  std::string artifact;
  bool cached = false;
  double duration_ms = 0.0;
  llm::Usage usage;
};

struct VoteRecord {
  int sample_index = 0;
  std::optional<std::string> answer;  // normalized text; nullopt = extraction failed
  grading::ExtractionSource source = grading::ExtractionSource::none;
};

/// Full per-problem record. Records are appended in execution order.
struct Transcript {
  std::string problem_id;
  std::string dataset;
  MethodVariant method = MethodVariant::dup;
  StageConfig stages;
  AnswerType answer_type = AnswerType::number;
  std::string gold_raw;
  std::string gold;
  std::vector<StageRecord> records;
  std::vector<VoteRecord> votes;
  grading::GradedResult graded;
  std::vector<std::string> errors;

  void append(StageRecord record) { records.push_back(std::move(record)); }
  bool ok() const { return errors.empty(); }
  std::size_t call_count() const { return records.size(); }
  /// Total tokens over all records.
  llm::Usage usage() const;

  nlohmann::json to_json() const;
  static Transcript from_json(const nlohmann::json& j);
};

/// File-name-safe form of a problem id. Ids that needed escaping get a
/// short digest suffix so distinct ids never collide.
std::string transcript_file_name(const std::string& problem_id);

void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace duprompt
