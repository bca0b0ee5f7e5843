#include "dup/response_cache.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

namespace duprompt::llm {

using nlohmann::json;

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path ResponseCache::entry_path(const std::string& key) const { return dir_ / (key + ".json"); }

std::optional<ChatResponse> ResponseCache::get(const std::string& key) const {
  const auto path = entry_path(key);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buffer;
  buffer << in.rdbuf();
  in.close();
  try {
    const auto j = json::parse(buffer.str());
    if (j.at("key").get<std::string>() != key) throw MalformedResponseError("key mismatch");
    return response_from_json(j.at("response"));
  } catch (const std::exception& e) {
    spdlog::warn("evicting corrupt cache entry {}: {}", path.string(), e.what());
    std::error_code ec;
    std::filesystem::remove(path, ec);
    return std::nullopt;
  }
}

void ResponseCache::put(const std::string& key, const ChatRequest& request, const ChatResponse& response) const {
  const json entry{{"key", key}, {"request", canonical_request_json(request)}, {"response", response_to_json(response)}};
  thread_local std::mt19937_64 rng{std::random_device{}()};
  const auto tmp = dir_ / (key + ".tmp." + std::to_string(rng()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write cache entry " + tmp.string());
    out << entry.dump(2);
    if (!out) throw std::runtime_error("short write on cache entry " + tmp.string());
  }
  std::filesystem::rename(tmp, entry_path(key));
}

}  // namespace duprompt::llm
