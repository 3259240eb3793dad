#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

#include "gnomon/common.hpp"

namespace gnomon {

// Counter-based stream RNG. Every (master seed, id...) tuple keys an independent
// stream whose n-th variate is a pure function of n, so sampling order and thread
// schedule cannot change results. Mixing is the SplitMix64 finalizer, which is
// statistically solid for Monte Carlo at the sample counts used here.

namespace detail {
inline uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

inline uint64_t hash_combine(uint64_t h, uint64_t v) {
  h ^= detail::mix64(v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  return detail::mix64(h + 0x9e3779b97f4a7c15ULL);
}

class RngStream {
 public:
  RngStream(uint64_t master, std::initializer_list<uint64_t> ids) : key_(master) {
    for (uint64_t id : ids) key_ = hash_combine(key_, id);
  }

  uint64_t bits(uint64_t ctr) const {
    return detail::mix64(key_ + 0x9e3779b97f4a7c15ULL * (ctr + 1));
  }

  // uniform in (0,1); never returns 0 so log() is safe
  double uniform(uint64_t ctr) const {
    return static_cast<double>(bits(ctr) >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

  // standard normal via Box-Muller; consumes counters 2n and 2n+1
  double normal(uint64_t n) const {
    double u1 = uniform(2 * n);
    double u2 = uniform(2 * n + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
  }

 private:
  uint64_t key_;
};

// stream id tags (keep stable: they are part of the reproducibility contract)
inline constexpr uint64_t kStreamBathX = 1;
inline constexpr uint64_t kStreamBathP = 2;

}  // namespace gnomon
