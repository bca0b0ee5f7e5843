#include <string>

#include "dup/llm_gateway.hpp"
#include "httplib.h"

namespace duprompt::llm {
namespace {

using nlohmann::json;

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // path prefix without trailing '/'
};

Endpoint split_base_url(const std::string& base_url) {
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) throw std::invalid_argument("base_url needs a scheme: " + base_url);
  const auto path_start = base_url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.origin = base_url.substr(0, path_start);
  ep.path = path_start == std::string::npos ? std::string{} : base_url.substr(path_start);
  while (!ep.path.empty() && ep.path.back() == '/') ep.path.pop_back();
  return ep;
}

// Generic chat-completions wire shape: POST <base>/chat/completions with
// {model, messages, temperature, max_tokens}; reply in choices[0].message.
class HttpBackend : public ChatBackend {
 public:
  explicit HttpBackend(const ProviderConfig& config)
      : endpoint_(split_base_url(config.base_url)), token_(config.auth_token), timeout_(config.timeout) {}

  ChatResponse send(const ChatRequest& request) override {
    httplib::Client client(endpoint_.origin);
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());
    if (!token_.empty()) client.set_bearer_token_auth(token_);

    json body = canonical_request_json(request);
    body.erase("sample_index");
    const auto result = client.Post(endpoint_.path + "/chat/completions", body.dump(), "application/json");
    if (!result) throw TransientError(0, "transport error: " + httplib::to_string(result.error()));

    const int status = result->status;
    const auto message = "HTTP " + std::to_string(status) + ": " + result->body.substr(0, 512);
    if (status == 401 || status == 403) throw AuthenticationError(status, message);
    if (status == 429 || status >= 500) throw TransientError(status, message);
    if (status < 200 || status >= 300) throw RequestRejectedError(status, message);
    return parse(result->body);
  }

 private:
  static ChatResponse parse(const std::string& text) {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw MalformedResponseError(std::string("response is not JSON: ") + e.what());
    }
    try {
      const auto& choice = j.at("choices").at(0);
      ChatResponse r;
      const auto& content = choice.at("message").at("content");
      r.content = content.is_null() ? std::string{} : content.get<std::string>();
      const auto reason = choice.value("finish_reason", json("stop"));
      r.finish_reason = parse_finish_reason(reason.is_string() ? reason.get<std::string>() : "stop");
      if (auto usage = j.find("usage"); usage != j.end() && usage->is_object()) {
        r.usage.prompt_tokens = usage->value("prompt_tokens", 0);
        r.usage.completion_tokens = usage->value("completion_tokens", 0);
      }
      if (r.finish_reason == FinishReason::stop && r.content.empty())
        throw MalformedResponseError("completion finished with empty content");
      return r;
    } catch (const json::exception& e) {
      throw MalformedResponseError(std::string("unexpected response shape: ") + e.what());
    }
  }

  Endpoint endpoint_;
  std::string token_;
  std::chrono::milliseconds timeout_;
};

}  // namespace

std::shared_ptr<ChatBackend> make_http_backend(const ProviderConfig& config) {
  return std::make_shared<HttpBackend>(config);
}

}  // namespace duprompt::llm
