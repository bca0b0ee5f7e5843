#include "dup/transcript.hpp"

#include <fstream>
#include <random>

namespace duprompt {

using nlohmann::json;

llm::Usage Transcript::usage() const {
  llm::Usage u;
  for (const auto& r : records) {
    u.prompt_tokens += r.usage.prompt_tokens;
    u.completion_tokens += r.usage.completion_tokens;
  }
  return u;
}

json Transcript::to_json() const {
  json records_json = json::array();
  for (const auto& r : records) {
    records_json.push_back({{"stage", r.stage},
                            {"sample", r.sample},
                            {"model", r.model},
                            {"prompt", r.prompt},
                            {"response", r.response},
                            {"artifact", r.artifact},
                            {"cached", r.cached},
                            {"duration_ms", r.duration_ms},
                            {"usage", {{"prompt_tokens", r.usage.prompt_tokens},
                                       {"completion_tokens", r.usage.completion_tokens}}}});
  }
  json votes_json = json::array();
  for (const auto& v : votes) {
    votes_json.push_back({{"sample_index", v.sample_index},
                          {"answer", v.answer ? json(*v.answer) : json(nullptr)},
                          {"source", std::string(grading::to_string(v.source))}});
  }
  return json{{"problem_id", problem_id},
              {"dataset", dataset},
              {"method", std::string(prompts::to_string(method))},
              {"stages", stages.to_string()},
              {"answer_type", std::string(to_string(answer_type))},
              {"gold_raw", gold_raw},
              {"gold", gold},
              {"records", std::move(records_json)},
              {"votes", std::move(votes_json)},
              {"predicted", graded.predicted ? json(graded.predicted->to_text()) : json(nullptr)},
              {"correct", graded.correct},
              {"extraction_source", std::string(grading::to_string(graded.extraction_source))},
              {"errors", errors},
              {"status", ok() ? "ok" : "error"}};
}

Transcript Transcript::from_json(const json& j) {
  Transcript t;
  t.problem_id = j.at("problem_id").get<std::string>();
  t.dataset = j.at("dataset").get<std::string>();
  t.method = prompts::parse_method(j.at("method").get<std::string>());
  t.stages = StageConfig::parse(j.at("stages").get<std::string>());
  const auto type = parse_answer_type(j.at("answer_type").get<std::string>());
  if (!type) throw std::runtime_error("transcript " + t.problem_id + ": bad answer_type");
  t.answer_type = *type;
  t.gold_raw = j.at("gold_raw").get<std::string>();
  t.gold = j.at("gold").get<std::string>();
  for (const auto& r : j.at("records")) {
    StageRecord rec;
    rec.stage = r.at("stage").get<std::string>();
    rec.sample = r.at("sample").get<int>();
    rec.model = r.at("model").get<std::string>();
    rec.prompt = r.at("prompt").get<std::string>();
    rec.response = r.at("response").get<std::string>();
    rec.artifact = r.at("artifact").get<std::string>();
    rec.cached = r.at("cached").get<bool>();
    rec.duration_ms = r.at("duration_ms").get<double>();
    rec.usage.prompt_tokens = r.at("usage").at("prompt_tokens").get<int>();
    rec.usage.completion_tokens = r.at("usage").at("completion_tokens").get<int>();
    t.records.push_back(std::move(rec));
  }
  for (const auto& v : j.at("votes")) {
    VoteRecord vote;
    vote.sample_index = v.at("sample_index").get<int>();
    if (!v.at("answer").is_null()) vote.answer = v.at("answer").get<std::string>();
    vote.source = grading::parse_extraction_source(v.at("source").get<std::string>());
    t.votes.push_back(std::move(vote));
  }
  t.graded.problem_id = t.problem_id;
  t.graded.correct = j.at("correct").get<bool>();
  t.graded.extraction_source = grading::parse_extraction_source(j.at("extraction_source").get<std::string>());
  if (const auto& p = j.at("predicted"); !p.is_null()) {
    t.graded.predicted = grading::normalize(p.get<std::string>(), t.answer_type);
  }
  t.errors = j.at("errors").get<std::vector<std::string>>();
  return t;
}

std::string transcript_file_name(const std::string& problem_id) {
  std::string safe;
  bool escaped = problem_id.empty();
  for (char c : problem_id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    safe.push_back(ok ? c : '_');
    escaped = escaped || !ok;
  }
  if (!safe.empty() && safe.front() == '.') {
    safe.front() = '_';
    escaped = true;
  }
  if (escaped) {
    safe += "-" + llm::sha256_hex(problem_id).substr(0, 12);
  }
  return safe + ".json";
}

void write_json_atomic(const std::filesystem::path& path, const json& j) {
  std::filesystem::create_directories(path.parent_path());
  thread_local std::mt19937_64 rng{std::random_device{}()};
  auto tmp = path;
  tmp += ".tmp." + std::to_string(rng());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("short write on " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return json::parse(in);
}

}  // namespace duprompt
