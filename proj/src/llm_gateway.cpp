#include "dup/llm_gateway.hpp"

#include <openssl/evp.h>

#include <thread>

#include <spdlog/spdlog.h>

#include "dup/mock_backend.hpp"
#include "dup/response_cache.hpp"

namespace duprompt::llm {

using nlohmann::json;

std::string_view to_string(Role role) {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

std::string_view to_string(FinishReason reason) {
  switch (reason) {
    case FinishReason::stop: return "stop";
    case FinishReason::length: return "length";
    case FinishReason::error: return "error";
  }
  return "error";
}

FinishReason parse_finish_reason(std::string_view text) {
  if (text == "length") return FinishReason::length;
  if (text == "error") return FinishReason::error;
  return FinishReason::stop;
}

void ChatRequest::validate() const {
  if (messages.empty()) throw InvalidRequestError("request has no messages");
  if (messages.back().role != Role::user) throw InvalidRequestError("last message must have role user");
  if (!(temperature >= 0.0)) throw InvalidRequestError("temperature must be >= 0");
  if (max_tokens <= 0) throw InvalidRequestError("max_tokens must be positive");
  if (sample_index < 0) throw InvalidRequestError("sample_index must be non-negative");
  if (temperature == 0.0 && sample_index != 0)
    throw InvalidRequestError("greedy decoding (temperature 0) requires sample_index 0");
}

void ProviderConfig::validate() const {
  if (backend == BackendKind::http && base_url.empty()) throw std::invalid_argument("http backend requires base_url");
  if (backend == BackendKind::mock && mock_script.empty())
    throw std::invalid_argument("mock backend requires a script file");
  if (max_retries < 0) throw std::invalid_argument("max_retries must be non-negative");
  if (max_concurrency <= 0) throw std::invalid_argument("max_concurrency must be positive");
}

json canonical_request_json(const ChatRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages)
    messages.push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
  // nlohmann::json objects are key-sorted, so dump() is canonical.
  return json{{"model", request.model},
              {"messages", std::move(messages)},
              {"temperature", request.temperature},
              {"max_tokens", request.max_tokens},
              {"sample_index", request.sample_index}};
}

std::string cache_key(const ChatRequest& request) { return sha256_hex(canonical_request_json(request).dump()); }

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0x0f]);
  }
  return hex;
}

json response_to_json(const ChatResponse& response) {
  return json{{"content", response.content},
              {"finish_reason", std::string(to_string(response.finish_reason))},
              {"usage",
               {{"prompt_tokens", response.usage.prompt_tokens},
                {"completion_tokens", response.usage.completion_tokens}}}};
}

ChatResponse response_from_json(const json& j) {
  try {
    ChatResponse r;
    r.content = j.at("content").get<std::string>();
    r.finish_reason = parse_finish_reason(j.at("finish_reason").get<std::string>());
    const auto& usage = j.at("usage");
    r.usage.prompt_tokens = usage.at("prompt_tokens").get<int>();
    r.usage.completion_tokens = usage.at("completion_tokens").get<int>();
    return r;
  } catch (const json::exception& e) {
    throw MalformedResponseError(std::string("bad response record: ") + e.what());
  }
}

namespace {

std::ptrdiff_t checked_concurrency(int n) {
  if (n <= 0) throw std::invalid_argument("max_concurrency must be positive");
  return n;
}

}  // namespace

Gateway::Gateway(std::shared_ptr<ChatBackend> backend, RetryPolicy retry, int max_concurrency,
                 std::optional<std::filesystem::path> cache_dir)
    : backend_(std::move(backend)),
      retry_(retry),
      permits_(checked_concurrency(max_concurrency)),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }),
      jitter_rng_(std::random_device{}()) {
  if (!backend_) throw std::invalid_argument("gateway needs a backend");
  if (cache_dir) cache_ = std::make_unique<ResponseCache>(*cache_dir);
}

Gateway::~Gateway() = default;

std::chrono::milliseconds Gateway::backoff(int attempt) {
  const auto base = retry_.base_delay.count();
  auto delay = base << std::min(attempt, 20);
  {
    std::lock_guard lock(jitter_mutex_);
    std::uniform_int_distribution<long long> jitter(0, base > 0 ? base - 1 : 0);
    delay += jitter(jitter_rng_);
  }
  return std::min(std::chrono::milliseconds(delay), retry_.max_delay);
}

ChatResponse Gateway::complete(const ChatRequest& request) {
  request.validate();
  int last_status = 0;
  std::string last_message;
  for (int attempt = 0; attempt <= retry_.max_retries; ++attempt) {
    if (attempt > 0) {
      const auto delay = backoff(attempt - 1);
      spdlog::warn("retrying {} request for '{}' (attempt {}/{}, status {}) in {} ms", request.label.stage,
                   request.label.problem_id, attempt, retry_.max_retries, last_status, delay.count());
      sleeper_(delay);
    }
    try {
      permits_.acquire();
      struct Release {
        std::counting_semaphore<>& s;
        ~Release() { s.release(); }
      } release{permits_};
      ++upstream_calls_;
      auto response = backend_->send(request);
      response.cached = false;
      return response;
    } catch (const TransientError& e) {
      last_status = e.status();
      last_message = e.what();
    }
  }
  throw RetriesExhaustedError(last_status, retry_.max_retries + 1,
                              "retries exhausted after " + std::to_string(retry_.max_retries + 1) +
                                  " attempts; last error: " + last_message);
}

ChatResponse Gateway::complete_cached(const ChatRequest& request) {
  if (!cache_) return complete(request);
  request.validate();
  const auto key = cache_key(request);
  if (auto hit = cache_->get(key)) {
    hit->cached = true;
    return *hit;
  }

  // Best-effort single flight: identical concurrent misses share one call.
  std::promise<ChatResponse> promise;
  std::shared_future<ChatResponse> shared;
  bool owner = false;
  {
    std::lock_guard lock(inflight_mutex_);
    auto it = inflight_.find(key);
    if (it == inflight_.end()) {
      shared = promise.get_future().share();
      inflight_.emplace(key, shared);
      owner = true;
    } else {
      shared = it->second;
    }
  }
  if (!owner) return shared.get();

  try {
    auto response = complete(request);
    if (response.finish_reason != FinishReason::error) cache_->put(key, request, response);
    promise.set_value(response);
  } catch (...) {
    promise.set_exception(std::current_exception());
  }
  {
    std::lock_guard lock(inflight_mutex_);
    inflight_.erase(key);
  }
  return shared.get();
}

std::unique_ptr<Gateway> make_gateway(const ProviderConfig& config, std::optional<std::filesystem::path> cache_dir) {
  config.validate();
  std::shared_ptr<ChatBackend> backend;
  if (config.backend == BackendKind::mock) {
    backend = std::make_shared<MockBackend>(MockScript::load(config.mock_script));
  } else {
    backend = make_http_backend(config);
  }
  RetryPolicy retry;
  retry.max_retries = config.max_retries;
  return std::make_unique<Gateway>(std::move(backend), retry, config.max_concurrency, std::move(cache_dir));
}

}  // namespace duprompt::llm
