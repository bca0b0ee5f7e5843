#pragma once

// Brute-force majority vote used to check the library's aggregate(): count
// every answer text, take the highest count, break ties by the earliest
// first appearance.

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace oracle {

inline std::optional<std::string> majority(const std::vector<std::optional<std::string>>& votes) {
  std::map<std::string, int> count;
  std::map<std::string, std::size_t> first;
  for (std::size_t i = 0; i < votes.size(); ++i) {
    if (!votes[i]) continue;
    ++count[*votes[i]];
    first.try_emplace(*votes[i], i);
  }
  std::optional<std::string> best;
  for (const auto& [answer, c] : count) {
    if (!best || c > count[*best] || (c == count[*best] && first[answer] < first[*best])) best = answer;
  }
  return best;
}

/// Seeded vote vectors of `size` entries drawn from `answers`; with
/// `failure_rate` > 0 some entries are failures (nullopt).
inline std::vector<std::vector<std::optional<std::string>>> random_vote_vectors(
    std::size_t count, std::size_t size, const std::vector<std::string>& answers, std::uint32_t seed,
    double failure_rate = 0.0) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, answers.size() - 1);
  std::bernoulli_distribution fail(failure_rate);
  std::vector<std::vector<std::optional<std::string>>> out(count);
  for (auto& v : out)
    for (std::size_t i = 0; i < size; ++i) {
      if (failure_rate > 0.0 && fail(rng))
        v.emplace_back(std::nullopt);
      else
        v.emplace_back(answers[pick(rng)]);
    }
  return out;
}

}  // namespace oracle
