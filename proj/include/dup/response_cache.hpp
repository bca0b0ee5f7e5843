#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "dup/llm_gateway.hpp"

namespace duprompt::llm {

/// One JSON file per key (`<hex digest>.json`) holding the request and its
/// response. Writes go to a temporary file that is renamed into place, so
/// concurrent readers see either nothing or a whole entry.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path entry_path(const std::string& key) const;

  /// A corrupt or mismatched entry is logged, removed and reported as a miss.
  std::optional<ChatResponse> get(const std::string& key) const;
  void put(const std::string& key, const ChatRequest& request, const ChatResponse& response) const;

 private:
  std::filesystem::path dir_;
};

}  // namespace duprompt::llm
