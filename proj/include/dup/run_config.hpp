#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "dup/prompt_stages.hpp"
#include "json.hpp"

namespace duprompt {

using prompts::MethodVariant;

/// Which of the three pipeline stages run. With stage 1 off and stage 2 on,
/// the info prompt's core-question slot receives the original question.
struct StageConfig {
  bool stage1 = true;
  bool stage2 = true;
  bool stage3 = true;

  /// "1,2,3", "1,3", "" (none).
  std::string to_string() const;
  /// Inverse of to_string(); accepts any order, rejects unknown digits.
  static StageConfig parse(std::string_view spec);
  int extraction_stages() const { return int{stage1} + int{stage2}; }

  bool operator==(const StageConfig&) const = default;
};

struct RunConfig {
  std::string dataset;
  MethodVariant method = MethodVariant::dup;
  // Last Letters switches DUP to the simplified single-prompt variant.
  bool auto_last_letter = true;
  StageConfig stages;
  std::string model = "gpt-3.5-turbo";
  // Model for stages 1 and 2 when it differs from the responder.
  std::optional<std::string> extractor_model;
  double temperature = 0.0;
  int n_samples = 1;
  int max_tokens = 1024;
  std::optional<std::size_t> max_problems;
  std::uint64_t seed = 0;
  std::optional<std::string> system_prompt;
  int workers = 1;
  std::filesystem::path cache_dir;
  std::filesystem::path out_dir;

  /// Throws std::invalid_argument on n_samples < 1, n_samples > 1 with
  /// temperature 0, negative temperature, or non-positive max_tokens/workers.
  void validate() const;

  MethodVariant effective_method() const;
  const std::string& stage_model() const { return extractor_model ? *extractor_model : model; }

  /// Experiment-defining fields only (no paths), for reports and the
  /// out_dir consistency check.
  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

}  // namespace duprompt
