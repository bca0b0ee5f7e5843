#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <thread>

#include "dup/llm_gateway.hpp"
#include "dup/mock_backend.hpp"
#include "dup/response_cache.hpp"
#include "fixtures.hpp"
#include "httplib.h"

using namespace duprompt::llm;
using nlohmann::json;

namespace {

ChatRequest make_request(std::string content, double temperature = 0.0, int sample = 0) {
  ChatRequest r;
  r.model = "test-model";
  r.messages = {{Role::user, std::move(content)}};
  r.temperature = temperature;
  r.sample_index = sample;
  r.label = {"answer", "p1", sample};
  return r;
}

// Replays a fixed sequence of outcomes: a status code (thrown the way the
// HTTP backend would) or 200 for success.
class SequenceBackend : public ChatBackend {
 public:
  explicit SequenceBackend(std::vector<int> statuses) : statuses_(std::move(statuses)) {}
  ChatResponse send(const ChatRequest& request) override {
    const auto i = calls_++;
    const int status = i < statuses_.size() ? statuses_[i] : 200;
    if (status == 401) throw AuthenticationError(401, "unauthorized");
    if (status == 400) throw RequestRejectedError(400, "bad request");
    if (status != 200) throw TransientError(status, "transient " + std::to_string(status));
    ChatResponse r;
    r.content = "reply to " + request.messages.back().content;
    return r;
  }
  std::size_t calls() const { return calls_.load(); }

 private:
  std::vector<int> statuses_;
  std::atomic<std::size_t> calls_{0};
};

class SlowBackend : public ChatBackend {
 public:
  ChatResponse send(const ChatRequest& request) override {
    const int now = ++in_flight_;
    int seen = peak_.load();
    while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(15));
    --in_flight_;
    ++calls_;
    ChatResponse r;
    r.content = request.messages.back().content;
    return r;
  }
  std::atomic<int> in_flight_{0};
  std::atomic<int> peak_{0};
  std::atomic<int> calls_{0};
};

RetryPolicy fast_retry(int max_retries = 5) {
  RetryPolicy p;
  p.max_retries = max_retries;
  p.base_delay = std::chrono::milliseconds(1);
  p.max_delay = std::chrono::milliseconds(2);
  return p;
}

}  // namespace

TEST(ChatRequest, Validation) {
  EXPECT_NO_THROW(make_request("hi").validate());
  EXPECT_THROW(make_request("hi", 0.0, 3).validate(), InvalidRequestError);
  EXPECT_NO_THROW(make_request("hi", 0.7, 3).validate());
  auto r = make_request("hi");
  r.messages.clear();
  EXPECT_THROW(r.validate(), InvalidRequestError);
  r = make_request("hi");
  r.messages.push_back({Role::assistant, "x"});
  EXPECT_THROW(r.validate(), InvalidRequestError);
  r = make_request("hi");
  r.temperature = -0.1;
  EXPECT_THROW(r.validate(), InvalidRequestError);
  r = make_request("hi");
  r.max_tokens = 0;
  EXPECT_THROW(r.validate(), InvalidRequestError);
}

TEST(CacheKey, CoversRequestContentOnly) {
  const auto base = make_request("hello");
  auto relabeled = base;
  relabeled.label = {"extract", "other", 0};
  EXPECT_EQ(cache_key(base), cache_key(relabeled));
  EXPECT_EQ(cache_key(base).size(), 64u);

  auto hotter = base;
  hotter.temperature = 0.7;
  EXPECT_NE(cache_key(base), cache_key(hotter));
  auto sampled = hotter;
  sampled.sample_index = 1;
  EXPECT_NE(cache_key(hotter), cache_key(sampled));
  auto longer = base;
  longer.max_tokens = 2048;
  EXPECT_NE(cache_key(base), cache_key(longer));
  auto other_model = base;
  other_model.model = "m2";
  EXPECT_NE(cache_key(base), cache_key(other_model));
}

TEST(CacheKey, CanonicalJsonIsKeySorted) {
  const auto text = canonical_request_json(make_request("x")).dump();
  EXPECT_LT(text.find("\"max_tokens\""), text.find("\"messages\""));
  EXPECT_LT(text.find("\"messages\""), text.find("\"model\""));
  EXPECT_LT(text.find("\"model\""), text.find("\"sample_index\""));
  EXPECT_LT(text.find("\"sample_index\""), text.find("\"temperature\""));
}

TEST(Gateway, RetriesTransientFailures) {
  auto backend = std::make_shared<SequenceBackend>(std::vector<int>{429, 503, 200});
  Gateway gw(backend, fast_retry(), 2);
  std::vector<std::chrono::milliseconds> sleeps;
  gw.set_sleeper([&](auto d) { sleeps.push_back(d); });
  const auto r = gw.complete(make_request("q"));
  EXPECT_EQ(r.content, "reply to q");
  EXPECT_EQ(backend->calls(), 3u);
  EXPECT_EQ(gw.upstream_calls(), 3u);
  EXPECT_EQ(sleeps.size(), 2u);
}

TEST(Gateway, BackoffGrowsAndIsCapped) {
  auto backend = std::make_shared<SequenceBackend>(std::vector<int>(6, 500));
  RetryPolicy p;
  p.max_retries = 5;
  p.base_delay = std::chrono::milliseconds(100);
  p.max_delay = std::chrono::milliseconds(1000);
  Gateway gw(backend, p, 1);
  std::vector<long long> sleeps;
  gw.set_sleeper([&](auto d) { sleeps.push_back(d.count()); });
  EXPECT_THROW(gw.complete(make_request("q")), RetriesExhaustedError);
  ASSERT_EQ(sleeps.size(), 5u);
  EXPECT_GE(sleeps[0], 100);
  EXPECT_LT(sleeps[0], 200);
  EXPECT_GE(sleeps[1], 200);
  EXPECT_LT(sleeps[1], 300);
  EXPECT_EQ(sleeps[4], 1000);
}

TEST(Gateway, ExhaustedRetriesReportLastStatus) {
  auto backend = std::make_shared<SequenceBackend>(std::vector<int>{500, 500, 503});
  Gateway gw(backend, fast_retry(2), 1);
  gw.set_sleeper([](auto) {});
  try {
    gw.complete(make_request("q"));
    FAIL() << "expected RetriesExhaustedError";
  } catch (const RetriesExhaustedError& e) {
    EXPECT_EQ(e.last_status(), 503);
    EXPECT_EQ(e.attempts(), 3);
  }
  EXPECT_EQ(backend->calls(), 3u);
}

TEST(Gateway, AuthAndRejectionAreNotRetried) {
  auto auth = std::make_shared<SequenceBackend>(std::vector<int>{401});
  Gateway gw(auth, fast_retry(), 1);
  EXPECT_THROW(gw.complete(make_request("q")), AuthenticationError);
  EXPECT_EQ(auth->calls(), 1u);

  auto rejected = std::make_shared<SequenceBackend>(std::vector<int>{400});
  Gateway gw2(rejected, fast_retry(), 1);
  EXPECT_THROW(gw2.complete(make_request("q")), RequestRejectedError);
  EXPECT_EQ(rejected->calls(), 1u);
}

TEST(Gateway, InvalidRequestNeverReachesBackend) {
  auto backend = std::make_shared<SequenceBackend>(std::vector<int>{});
  Gateway gw(backend, fast_retry(), 1);
  EXPECT_THROW(gw.complete(make_request("q", 0.0, 2)), InvalidRequestError);
  EXPECT_EQ(backend->calls(), 0u);
}

TEST(Gateway, CacheHitSkipsBackend) {
  fixtures::TempDir dir;
  auto backend = std::make_shared<SequenceBackend>(std::vector<int>{});
  Gateway gw(backend, fast_retry(), 2, dir.path());
  const auto first = gw.complete_cached(make_request("q"));
  const auto second = gw.complete_cached(make_request("q"));
  EXPECT_FALSE(first.cached);
  EXPECT_TRUE(second.cached);
  EXPECT_EQ(first.content, second.content);
  EXPECT_EQ(backend->calls(), 1u);

  // A fresh gateway over the same directory sees the persisted entry.
  Gateway again(backend, fast_retry(), 2, dir.path());
  EXPECT_TRUE(again.complete_cached(make_request("q")).cached);
  EXPECT_EQ(backend->calls(), 1u);
}

TEST(Gateway, CorruptCacheEntryIsRefetched) {
  fixtures::TempDir dir;
  auto backend = std::make_shared<SequenceBackend>(std::vector<int>{});
  Gateway gw(backend, fast_retry(), 1, dir.path());
  const auto req = make_request("q");
  gw.complete_cached(req);
  const ResponseCache cache(dir.path());
  fixtures::write_file(cache.entry_path(cache_key(req)), "{ not json");
  const auto r = gw.complete_cached(req);
  EXPECT_FALSE(r.cached);
  EXPECT_EQ(r.content, "reply to q");
  EXPECT_EQ(backend->calls(), 2u);
  EXPECT_TRUE(gw.complete_cached(req).cached);
}

TEST(Gateway, FailuresAreNotCached) {
  fixtures::TempDir dir;
  auto backend = std::make_shared<SequenceBackend>(std::vector<int>{400, 200});
  Gateway gw(backend, fast_retry(), 1, dir.path());
  EXPECT_THROW(gw.complete_cached(make_request("q")), RequestRejectedError);
  EXPECT_FALSE(gw.complete_cached(make_request("q")).cached);
}

TEST(Gateway, ConcurrencyLimitHolds) {
  auto backend = std::make_shared<SlowBackend>();
  Gateway gw(backend, fast_retry(), 3);
  std::vector<std::jthread> threads;
  for (int t = 0; t < 8; ++t)
    threads.emplace_back([&, t] {
      for (int i = 0; i < 3; ++i) gw.complete(make_request("t" + std::to_string(t) + "-" + std::to_string(i)));
    });
  threads.clear();
  EXPECT_EQ(backend->calls_.load(), 24);
  EXPECT_LE(backend->peak_.load(), 3);
  EXPECT_GE(backend->peak_.load(), 2);
}

TEST(Gateway, IdenticalConcurrentMissesShareOneCall) {
  fixtures::TempDir dir;
  auto backend = std::make_shared<SlowBackend>();
  Gateway gw(backend, fast_retry(), 8, dir.path());
  std::vector<std::string> replies(8);
  {
    std::vector<std::jthread> threads;
    for (int t = 0; t < 8; ++t) threads.emplace_back([&, t] { replies[t] = gw.complete_cached(make_request("same")).content; });
  }
  EXPECT_EQ(backend->calls_.load(), 1);
  for (const auto& r : replies) EXPECT_EQ(r, "same");
}

TEST(ResponseJson, RoundTrip) {
  ChatResponse r;
  r.content = "text";
  r.finish_reason = FinishReason::length;
  r.usage = {11, 7};
  const auto back = response_from_json(response_to_json(r));
  EXPECT_EQ(back.content, "text");
  EXPECT_EQ(back.finish_reason, FinishReason::length);
  EXPECT_EQ(back.usage.prompt_tokens, 11);
  EXPECT_EQ(back.usage.completion_tokens, 7);
  EXPECT_THROW(response_from_json(json{{"content", 3}}), MalformedResponseError);
}

TEST(MockBackend, LookupOrderAndSamples) {
  MockScript script;
  script.set_default("answer", std::string("default"));
  script.set_response("p1", "answer", std::vector<std::string>{"s0", "s1"});
  auto digest_req = make_request("pinned", 0.0, 0);
  digest_req.label.problem_id = "p2";
  script.set_digest(cache_key(digest_req), std::string("by digest"));
  MockBackend mock(script);

  EXPECT_EQ(mock.send(make_request("a", 0.7, 0)).content, "s0");
  EXPECT_EQ(mock.send(make_request("a", 0.7, 1)).content, "s1");
  EXPECT_THROW(mock.send(make_request("a", 0.7, 2)), ScriptMissError);
  auto other = make_request("a");
  other.label.problem_id = "p9";
  EXPECT_EQ(mock.send(other).content, "default");
  EXPECT_EQ(mock.send(digest_req).content, "by digest");
  auto unknown = make_request("a");
  unknown.label = {"judge", "p9", 0};
  EXPECT_THROW(mock.send(unknown), ScriptMissError);
  EXPECT_EQ(mock.calls(), 6u);
  EXPECT_EQ(mock.calls_by_stage().at("answer"), 5u);
}

TEST(MockBackend, ScriptedStatuses) {
  const auto script = MockScript::from_json(json::parse(R"({"responses": {"p1": {
      "a": {"status": 429}, "b": {"status": 401}, "c": {"status": 404}, "d": {"status": 502}}}})"));
  MockBackend mock(script);
  auto req = make_request("x");
  req.label.stage = "a";
  EXPECT_THROW(mock.send(req), TransientError);
  req.label.stage = "b";
  EXPECT_THROW(mock.send(req), AuthenticationError);
  req.label.stage = "c";
  EXPECT_THROW(mock.send(req), RequestRejectedError);
  req.label.stage = "d";
  EXPECT_THROW(mock.send(req), TransientError);
  EXPECT_THROW(MockScript::from_json(json::parse(R"({"defaults": {"a": 5}})")), std::invalid_argument);
}

namespace {

// Local OpenAI-style endpoint with a programmable status sequence.
class FakeServer {
 public:
  explicit FakeServer(std::vector<int> statuses, std::string ok_body = {}) : statuses_(std::move(statuses)) {
    if (ok_body.empty())
      ok_body = R"({"choices":[{"message":{"role":"assistant","content":"eighteen"},"finish_reason":"stop"}],
                   "usage":{"prompt_tokens":5,"completion_tokens":1}})";
    server_.Post("/v1/chat/completions", [this, ok_body](const httplib::Request& req, httplib::Response& res) {
      const auto i = hits_++;
      {
        std::lock_guard lock(mutex_);
        last_body_ = req.body;
        last_auth_ = req.get_header_value("Authorization");
      }
      const int status = i < statuses_.size() ? statuses_[i] : 200;
      res.status = status;
      res.set_content(status == 200 ? ok_body : R"({"error":"nope"})", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }
  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
  std::size_t hits() const { return hits_.load(); }
  json last_body() {
    std::lock_guard lock(mutex_);
    return json::parse(last_body_);
  }
  std::string last_auth() {
    std::lock_guard lock(mutex_);
    return last_auth_;
  }

 private:
  httplib::Server server_;
  std::vector<int> statuses_;
  std::atomic<std::size_t> hits_{0};
  int port_ = 0;
  std::thread thread_;
  std::mutex mutex_;
  std::string last_body_;
  std::string last_auth_;
};

std::unique_ptr<Gateway> http_gateway(const std::string& base_url) {
  ProviderConfig pc;
  pc.backend = BackendKind::http;
  pc.base_url = base_url;
  pc.auth_token = "sk-test";
  pc.timeout = std::chrono::milliseconds(5000);
  auto gw = make_gateway(pc);
  gw->set_sleeper([](auto) {});
  return gw;
}

}  // namespace

TEST(HttpBackend, RetriesThrough429) {
  FakeServer server({429, 429, 200});
  auto gw = http_gateway(server.base_url());
  const auto r = gw->complete(make_request("How much?"));
  EXPECT_EQ(r.content, "eighteen");
  EXPECT_EQ(r.usage.prompt_tokens, 5);
  EXPECT_EQ(server.hits(), 3u);
  EXPECT_EQ(gw->upstream_calls(), 3u);

  const auto body = server.last_body();
  EXPECT_EQ(body.at("model"), "test-model");
  EXPECT_EQ(body.at("messages").at(0).at("role"), "user");
  EXPECT_EQ(body.at("messages").at(0).at("content"), "How much?");
  EXPECT_EQ(body.at("temperature"), 0.0);
  EXPECT_EQ(body.at("max_tokens"), 1024);
  EXPECT_FALSE(body.contains("sample_index"));
  EXPECT_EQ(server.last_auth(), "Bearer sk-test");
}

TEST(HttpBackend, AuthFailureIsImmediate) {
  FakeServer server({401});
  auto gw = http_gateway(server.base_url());
  EXPECT_THROW(gw->complete(make_request("q")), AuthenticationError);
  EXPECT_EQ(server.hits(), 1u);
}

TEST(HttpBackend, MalformedBodies) {
  FakeServer not_json({}, "<html>");
  EXPECT_THROW(http_gateway(not_json.base_url())->complete(make_request("q")), MalformedResponseError);
  FakeServer empty({}, R"({"choices":[{"message":{"content":""},"finish_reason":"stop"}]})");
  EXPECT_THROW(http_gateway(empty.base_url())->complete(make_request("q")), MalformedResponseError);
  FakeServer no_choices({}, R"({"id":"x"})");
  EXPECT_THROW(http_gateway(no_choices.base_url())->complete(make_request("q")), MalformedResponseError);
}

TEST(HttpBackend, ConnectionFailureIsTransient) {
  ProviderConfig pc;
  pc.base_url = "http://127.0.0.1:1/v1";
  pc.max_retries = 1;
  pc.timeout = std::chrono::milliseconds(500);
  auto gw = make_gateway(pc);
  gw->set_sleeper([](auto) {});
  try {
    gw->complete(make_request("q"));
    FAIL() << "expected RetriesExhaustedError";
  } catch (const RetriesExhaustedError& e) {
    EXPECT_EQ(e.last_status(), 0);
    EXPECT_EQ(e.attempts(), 2);
  }
}

TEST(ProviderConfig, Validation) {
  ProviderConfig pc;
  EXPECT_THROW(pc.validate(), std::invalid_argument);
  pc.base_url = "http://x";
  EXPECT_NO_THROW(pc.validate());
  pc.max_concurrency = 0;
  EXPECT_THROW(pc.validate(), std::invalid_argument);
  ProviderConfig mock;
  mock.backend = BackendKind::mock;
  EXPECT_THROW(mock.validate(), std::invalid_argument);
}
