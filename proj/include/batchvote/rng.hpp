#pragma once
// Deterministic, splittable random streams. Everything is built on the
// splitmix64 finalizer so results are identical across platforms and thread
// counts; std::uniform_int_distribution and friends are deliberately avoided
// because their output is implementation-defined.

#include <cstdint>

namespace batchvote::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

// splitmix64 output function (Steele, Lea, Flood 2014).
inline constexpr std::uint64_t mix(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Domain tags keep independently derived streams disjoint.
enum class Domain : std::uint64_t {
  Recipient = 1,  // per-batch recipient draw
  Trial = 2,      // per-trial Monte Carlo stream
  Sample = 3,     // quality + signal sampling inside a trial
};

// Derive an independent child seed from (key, domain, index).
inline constexpr std::uint64_t derive(std::uint64_t key, Domain domain,
                                      std::uint64_t index) {
  std::uint64_t h = mix(key ^ kGolden);
  h = mix(h ^ static_cast<std::uint64_t>(domain));
  return mix(h ^ index);
}

// Counter-based stream: output i is mix(seed + i * golden), so any draw can
// be reproduced from (seed, counter) alone.
class Stream {
 public:
  explicit constexpr Stream(std::uint64_t seed) : state_(seed) {}

  constexpr std::uint64_t next() {
    state_ += kGolden;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return unit() < p; }

  // Unbiased uniform draw from {0, ..., n-1} (Lemire's rejection method).
  std::uint32_t below(std::uint32_t n) {
    std::uint64_t x = next() & 0xffffffffull;
    std::uint64_t m = x * n;
    auto lo = static_cast<std::uint32_t>(m);
    if (lo < n) {
      std::uint32_t threshold = (0u - n) % n;
      while (lo < threshold) {
        x = next() & 0xffffffffull;
        m = x * n;
        lo = static_cast<std::uint32_t>(m);
      }
    }
    return static_cast<std::uint32_t>(m >> 32);
  }

 private:
  std::uint64_t state_;
};

}  // namespace batchvote::rng
