#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

#include "drbandit/math.hpp"

namespace drbandit {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stream identifiers so each (replication, purpose) pair draws from an
/// independent generator. Adding a policy or metric never perturbs the
/// randomness seen by existing consumers.
enum class StreamPurpose : std::uint64_t {
  contexts = 1,
  beta = 2,
  rewards = 3,
  policy = 4,
  oracle = 5,
  sweep = 6,
};

/// Derives a 64-bit stream seed from (master seed, replication, purpose).
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t replication,
                                 StreamPurpose purpose) {
  std::uint64_t s = master;
  (void)splitmix64(s);
  s ^= 0x6a09e667f3bcc909ULL + replication;
  (void)splitmix64(s);
  s ^= 0xbb67ae8584caa73bULL + static_cast<std::uint64_t>(purpose);
  return splitmix64(s);
}

/// Seeded random stream. Normal variates come from the inverse CDF so the
/// sequence is fully determined by the engine output, independent of any
/// library distribution internals.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}
  RngStream(std::uint64_t master, std::uint64_t replication, StreamPurpose purpose)
      : engine_(stream_seed(master, replication, purpose)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform draw in the open interval (0,1).
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform draw in (lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double normal() { return normal_quantile(uniform01()); }

  /// Uniform integer in [0, n).
  int uniform_int(int n) {
    if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
  }

  /// Samples an index from a (sub)probability vector; probabilities are read
  /// as-is and the last index absorbs any rounding slack.
  int categorical(std::span<const double> probs) {
    const double u = uniform01();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace drbandit
