#pragma once

#include <cstdint>
#include <vector>

namespace annotator {

// Portable deterministic RNG: splitmix64 (Steele, Lea & Flood 2014).
// Every sampling decision in this project goes through this generator so a
// (seed, input) pair reproduces bit-identically on any platform. The
// algorithm id recorded in run manifests is "splitmix64-v1"; changing the
// stream would invalidate persisted splits, so don't.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Unbiased integer in [0, n), n >= 1. Rejection sampling on the low bits'
  // modulo; expected < 2 draws.
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

 private:
  std::uint64_t state_;
};

// First `count` elements of a uniform permutation of {0, ..., n-1}
// (partial Fisher-Yates), in draw order.
std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                    std::size_t count,
                                                    SplitMix64& rng);

inline const char* rng_algorithm_id() { return "splitmix64-v1"; }

}  // namespace annotator
