#include "dup/mock_backend.hpp"

#include <fstream>

namespace duprompt::llm {

using nlohmann::json;

namespace {

MockScript::Entry parse_entry(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_array()) return j.get<std::vector<std::string>>();
  if (j.is_object() && j.contains("status")) return MockScript::Failure{j.at("status").get<int>()};
  throw std::invalid_argument("mock script entry must be a string, an array of strings or {\"status\": N}: " +
                              j.dump());
}

int count_words(const std::string& s) {
  int n = 0;
  bool in_word = false;
  for (char c : s) {
    const bool space = c == ' ' || c == '\n' || c == '\t' || c == '\r';
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

}  // namespace

MockScript MockScript::from_json(const json& j) {
  MockScript script;
  if (auto it = j.find("digests"); it != j.end())
    for (const auto& [key, value] : it->items()) script.set_digest(key, parse_entry(value));
  if (auto it = j.find("responses"); it != j.end())
    for (const auto& [problem, stages] : it->items())
      for (const auto& [stage, value] : stages.items()) script.set_response(problem, stage, parse_entry(value));
  if (auto it = j.find("defaults"); it != j.end())
    for (const auto& [stage, value] : it->items()) script.set_default(stage, parse_entry(value));
  return script;
}

MockScript MockScript::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mock script " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw std::runtime_error("mock script " + path.string() + ": " + e.what());
  }
}

void MockScript::set_digest(const std::string& key, Entry entry) { digests_[key] = std::move(entry); }

void MockScript::set_response(const std::string& problem_id, const std::string& stage, Entry entry) {
  responses_[problem_id][stage] = std::move(entry);
}

void MockScript::set_default(const std::string& stage, Entry entry) { defaults_[stage] = std::move(entry); }

const MockScript::Entry* MockScript::find(const ChatRequest& request) const {
  if (!digests_.empty()) {
    if (auto it = digests_.find(cache_key(request)); it != digests_.end()) return &it->second;
  }
  if (auto p = responses_.find(request.label.problem_id); p != responses_.end()) {
    if (auto s = p->second.find(request.label.stage); s != p->second.end()) return &s->second;
  }
  if (auto it = defaults_.find(request.label.stage); it != defaults_.end()) return &it->second;
  return nullptr;
}

ChatResponse MockBackend::send(const ChatRequest& request) {
  ++calls_;
  {
    std::lock_guard lock(stage_mutex_);
    ++stage_calls_[request.label.stage];
  }
  const auto* entry = script_.find(request);
  const auto where = "problem '" + request.label.problem_id + "' stage '" + request.label.stage + "'";
  if (!entry) throw ScriptMissError("mock script has no reply for " + where);

  std::string content;
  if (const auto* text = std::get_if<std::string>(entry)) {
    content = *text;
  } else if (const auto* list = std::get_if<std::vector<std::string>>(entry)) {
    const auto index = static_cast<std::size_t>(request.label.sample);
    if (index >= list->size())
      throw ScriptMissError("mock script has no sample " + std::to_string(index) + " for " + where);
    content = (*list)[index];
  } else {
    const int status = std::get<MockScript::Failure>(*entry).status;
    const auto message = "scripted failure " + std::to_string(status) + " for " + where;
    if (status == 401 || status == 403) throw AuthenticationError(status, message);
    if (status == 429 || status >= 500 || status == 0) throw TransientError(status, message);
    throw RequestRejectedError(status, message);
  }

  ChatResponse response;
  response.content = std::move(content);
  response.finish_reason = FinishReason::stop;
  int prompt_words = 0;
  for (const auto& m : request.messages) prompt_words += count_words(m.content);
  response.usage = {prompt_words, count_words(response.content)};
  return response;
}

std::map<std::string, std::size_t> MockBackend::calls_by_stage() const {
  std::lock_guard lock(stage_mutex_);
  return stage_calls_;
}

}  // namespace duprompt::llm
