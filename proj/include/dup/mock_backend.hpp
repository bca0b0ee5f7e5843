#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <variant>
#include <vector>

#include "dup/llm_gateway.hpp"
#include "json.hpp"

namespace duprompt::llm {

/// Scripted replies for offline runs. Lookup order for a request:
///   1. "digests":   { "<cache_key>": entry }
///   2. "responses": { "<problem id>": { "<stage>": entry } }
///   3. "defaults":  { "<stage>": entry }
/// An entry is a string, an array of strings indexed by the label's sample
/// number, or {"status": <http status>} to simulate a failure.
class MockScript {
 public:
  struct Failure {
    int status = 500;
  };
  using Entry = std::variant<std::string, std::vector<std::string>, Failure>;

  MockScript() = default;
  static MockScript from_json(const nlohmann::json& j);
  static MockScript load(const std::filesystem::path& path);

  void set_digest(const std::string& key, Entry entry);
  void set_response(const std::string& problem_id, const std::string& stage, Entry entry);
  void set_default(const std::string& stage, Entry entry);

  const Entry* find(const ChatRequest& request) const;

 private:
  std::map<std::string, Entry> digests_;
  std::map<std::string, std::map<std::string, Entry>> responses_;
  std::map<std::string, Entry> defaults_;
};

class ScriptMissError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

class MockBackend : public ChatBackend {
 public:
  explicit MockBackend(MockScript script) : script_(std::move(script)) {}

  ChatResponse send(const ChatRequest& request) override;

  std::size_t calls() const { return calls_.load(); }
  /// Calls per stage label, for pipeline-shape assertions.
  std::map<std::string, std::size_t> calls_by_stage() const;

 private:
  MockScript script_;
  std::atomic<std::size_t> calls_{0};
  mutable std::mutex stage_mutex_;
  std::map<std::string, std::size_t> stage_calls_;
};

}  // namespace duprompt::llm
