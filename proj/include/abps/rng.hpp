#pragma once

#include <cmath>
#include <cstdint>

namespace abps {

// SplitMix64 finalizer.
inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based splittable stream. The initial state is a hash of the key
// words (seed, a, b, c); the sequence then advances as splitmix64. Distinct
// keys yield statistically independent streams, so replicas can be generated
// in parallel and still match a serial run bit for bit.
class RngStream {
 public:
  explicit RngStream(uint64_t seed, uint64_t a = 0, uint64_t b = 0, uint64_t c = 0)
      : state_(mix64(mix64(mix64(mix64(seed) ^ a) ^ b) ^ c)) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on (0,1]; never returns 0 so log() is safe.
  double uniform() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  // Standard normal via Box-Muller; the second member of each pair is cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double r = std::sqrt(-2.0 * std::log(uniform()));
    double a = 6.283185307179586476925287 * uniform();
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

  // Uniform integer in [0, n), n >= 1. Rejection-free modulo is fine here:
  // n is tiny compared to 2^64 so the bias is below 2^-40.
  uint64_t below(uint64_t n) { return next_u64() % n; }

 private:
  uint64_t state_;
  double cached_ = 0;
  bool has_cached_ = false;
};

}  // namespace abps
