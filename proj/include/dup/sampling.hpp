#pragma once

#include <cstdint>
#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

namespace duprompt {

/// Permutation of 0..n-1 from a seeded Fisher-Yates shuffle. Uses only the
/// mt19937_64 bit stream (no std::uniform_int_distribution or std::shuffle),
/// so the result is identical across standard libraries.
inline std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::uint64_t bound = i;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t draw = rng();
    while (draw >= limit) draw = rng();
    std::swap(order[i - 1], order[static_cast<std::size_t>(draw % bound)]);
  }
  return order;
}

/// First k entries of a seeded permutation, in ascending index order.
inline std::vector<std::size_t> seeded_subset(std::size_t n, std::size_t k, std::uint64_t seed) {
  auto order = seeded_permutation(n, seed);
  if (k < order.size()) order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace duprompt
