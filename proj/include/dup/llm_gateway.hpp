#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace duprompt::llm {

enum class Role { system, user, assistant };

std::string_view to_string(Role role);

struct Message {
  Role role = Role::user;
  std::string content;
  bool operator==(const Message&) const = default;
};

/// Routing metadata for scripted backends and transcripts. Never part of the
/// cache key.
struct RequestLabel {
  std::string stage;
  std::string problem_id;
  int sample = 0;
};

struct ChatRequest {
  std::string model;
  std::vector<Message> messages;
  double temperature = 0.0;
  int max_tokens = 1024;
  // Separates self-consistency samples whose content is identical.
  int sample_index = 0;
  RequestLabel label;

  /// Throws InvalidRequestError on: no messages, last role not user,
  /// negative temperature, non-positive max_tokens, or sample_index != 0
  /// under greedy decoding.
  void validate() const;
};

enum class FinishReason { stop, length, error };

std::string_view to_string(FinishReason reason);
FinishReason parse_finish_reason(std::string_view text);

struct Usage {
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

struct ChatResponse {
  std::string content;
  FinishReason finish_reason = FinishReason::stop;
  Usage usage;
  bool cached = false;
};

class GatewayError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidRequestError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

/// Retryable failure: timeout, connection error, 429, 5xx. status 0 means
/// no HTTP status was received.
class TransientError : public GatewayError {
 public:
  TransientError(int status, const std::string& what) : GatewayError(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

class AuthenticationError : public GatewayError {
 public:
  AuthenticationError(int status, const std::string& what) : GatewayError(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

/// Any other 4xx. Not retried.
class RequestRejectedError : public GatewayError {
 public:
  RequestRejectedError(int status, const std::string& what) : GatewayError(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

class MalformedResponseError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

class RetriesExhaustedError : public GatewayError {
 public:
  RetriesExhaustedError(int last_status, int attempts, const std::string& what)
      : GatewayError(what), last_status_(last_status), attempts_(attempts) {}
  int last_status() const { return last_status_; }
  int attempts() const { return attempts_; }

 private:
  int last_status_;
  int attempts_;
};

/// One provider transport. Implementations throw the error classes above.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatResponse send(const ChatRequest& request) = 0;
};

enum class BackendKind { http, mock };

struct ProviderConfig {
  BackendKind backend = BackendKind::http;
  std::string base_url;
  std::string auth_token;
  std::chrono::milliseconds timeout{120'000};
  int max_retries = 5;
  int max_concurrency = 4;
  std::filesystem::path mock_script;

  void validate() const;
};

struct RetryPolicy {
  int max_retries = 5;
  std::chrono::milliseconds base_delay{500};
  std::chrono::milliseconds max_delay{30'000};
};

/// Hex SHA-256 over the canonical JSON of (model, messages, temperature,
/// max_tokens, sample_index). Keys are serialized sorted, so field order in
/// any source representation does not matter.
std::string cache_key(const ChatRequest& request);

std::string sha256_hex(std::string_view data);

/// The part of a request the key covers, as sorted-key JSON.
nlohmann::json canonical_request_json(const ChatRequest& request);
nlohmann::json response_to_json(const ChatResponse& response);
/// Throws MalformedResponseError when fields are missing or mistyped.
ChatResponse response_from_json(const nlohmann::json& j);

class ResponseCache;

/// Shareable across threads. At most `max_concurrency` backend calls are in
/// flight; retry sleeps do not hold a permit.
class Gateway {
 public:
  Gateway(std::shared_ptr<ChatBackend> backend, RetryPolicy retry, int max_concurrency,
          std::optional<std::filesystem::path> cache_dir = std::nullopt);
  ~Gateway();

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  ChatResponse complete(const ChatRequest& request);

  /// Serves from the cache when the key is present (cached = true, no
  /// backend call). Otherwise completes, persists and returns cached = false.
  /// Without a cache directory this is complete().
  ChatResponse complete_cached(const ChatRequest& request);

  /// Backend send attempts made so far, retries included.
  std::size_t upstream_calls() const { return upstream_calls_.load(); }

  /// Replaces the sleep used between retries (tests).
  void set_sleeper(std::function<void(std::chrono::milliseconds)> sleeper) { sleeper_ = std::move(sleeper); }

 private:
  std::chrono::milliseconds backoff(int attempt);

  std::shared_ptr<ChatBackend> backend_;
  RetryPolicy retry_;
  std::counting_semaphore<> permits_;
  std::unique_ptr<ResponseCache> cache_;
  std::atomic<std::size_t> upstream_calls_{0};
  std::function<void(std::chrono::milliseconds)> sleeper_;

  std::mutex jitter_mutex_;
  std::mt19937_64 jitter_rng_;

  std::mutex inflight_mutex_;
  std::map<std::string, std::shared_future<ChatResponse>> inflight_;
};

/// Builds the backend named by `config` (reading the mock script if needed).
std::unique_ptr<Gateway> make_gateway(const ProviderConfig& config,
                                      std::optional<std::filesystem::path> cache_dir = std::nullopt);

std::shared_ptr<ChatBackend> make_http_backend(const ProviderConfig& config);

}  // namespace duprompt::llm
