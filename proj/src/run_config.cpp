#include "dup/run_config.hpp"

#include <stdexcept>

#include "dup/datasets.hpp"

namespace duprompt {

using nlohmann::json;

std::string StageConfig::to_string() const {
  std::string out;
  auto add = [&](bool on, char digit) {
    if (!on) return;
    if (!out.empty()) out.push_back(',');
    out.push_back(digit);
  };
  add(stage1, '1');
  add(stage2, '2');
  add(stage3, '3');
  return out;
}

StageConfig StageConfig::parse(std::string_view spec) {
  StageConfig s{false, false, false};
  for (char c : spec) {
    switch (c) {
      case '1': s.stage1 = true; break;
      case '2': s.stage2 = true; break;
      case '3': s.stage3 = true; break;
      case ',': case ' ': break;
      default: throw std::invalid_argument("bad stage list '" + std::string(spec) + "'; use a subset of 1,2,3");
    }
  }
  return s;
}

void RunConfig::validate() const {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  if (temperature < 0.0) throw std::invalid_argument("temperature must be >= 0");
  if (n_samples > 1 && temperature <= 0.0)
    throw std::invalid_argument("self-consistency with more than one sample needs temperature > 0");
  if (max_tokens <= 0) throw std::invalid_argument("max_tokens must be positive");
  if (workers <= 0) throw std::invalid_argument("workers must be positive");
  if (model.empty()) throw std::invalid_argument("model must be set");
}

MethodVariant RunConfig::effective_method() const {
  if (method == MethodVariant::dup && auto_last_letter && data::canonical_dataset_id(dataset) == "last_letters")
    return MethodVariant::last_letter_simplified;
  return method;
}

json RunConfig::to_json() const {
  json j{{"dataset", dataset},
         {"method", std::string(prompts::to_string(method))},
         {"auto_last_letter", auto_last_letter},
         {"stages", stages.to_string()},
         {"model", model},
         {"extractor_model", extractor_model ? json(*extractor_model) : json(nullptr)},
         {"temperature", temperature},
         {"n_samples", n_samples},
         {"max_tokens", max_tokens},
         {"max_problems", max_problems ? json(*max_problems) : json(nullptr)},
         {"seed", seed},
         {"system_prompt", system_prompt ? json(*system_prompt) : json(nullptr)}};
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  c.dataset = j.at("dataset").get<std::string>();
  c.method = prompts::parse_method(j.at("method").get<std::string>());
  c.auto_last_letter = j.value("auto_last_letter", true);
  c.stages = StageConfig::parse(j.at("stages").get<std::string>());
  c.model = j.at("model").get<std::string>();
  if (const auto& v = j.at("extractor_model"); !v.is_null()) c.extractor_model = v.get<std::string>();
  c.temperature = j.at("temperature").get<double>();
  c.n_samples = j.at("n_samples").get<int>();
  c.max_tokens = j.value("max_tokens", 1024);
  if (const auto& v = j.at("max_problems"); !v.is_null()) c.max_problems = v.get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("system_prompt") && !j.at("system_prompt").is_null())
    c.system_prompt = j.at("system_prompt").get<std::string>();
  return c;
}

}  // namespace duprompt
