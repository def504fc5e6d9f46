#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace factlab::detail {

// Unbiased draw from [0, n) with a fixed rejection scheme, so sampled runs
// reproduce exactly for a given seed regardless of standard library.
inline std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t n) {
  const std::uint64_t maxv = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = maxv - maxv % n;
  std::uint64_t v;
  do {
    v = gen();
  } while (v >= limit);
  return v % n;
}

}  // namespace factlab::detail
