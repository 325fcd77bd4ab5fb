#pragma once

#include <cstdint>

namespace dropnet {

/// SplitMix64 finalizer (Steele, Lea and Flood, 2014).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based stream generator built on SplitMix64.
///
/// Stream `s` of seed `k` starts from mix(k ^ mix(s + golden)) and then walks
/// the usual SplitMix64 sequence, so any (seed, stream) pair is addressable
/// without touching other streams. Monte Carlo sample i and training run r each
/// get their own stream, which keeps results independent of thread count.
class Rng {
 public:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : state_(splitmix64_mix(seed ^ splitmix64_mix(stream + kGolden))) {}

  std::uint64_t next_u64() {
    state_ += kGolden;
    return splitmix64_mix(state_);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, bound) by rejection; bound > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = -bound % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= limit) return r % bound;
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace dropnet
