// SPDX-FileCopyrightText: 2026 The rigidflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>

namespace rigidflow {

// splitmix64 step; used for seeding and for keying per-item draws on
// (seed, index) so results do not depend on scheduling or arrival order.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a,
                              std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(seed ^ 0x6a09e667f3bcc909ULL);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  h = splitmix64(h ^ c);
  return h;
}

// Small deterministic generator (xorshift128+). Not std::mt19937 with the
// standard distributions: those are implementation-defined and the streams
// here must be reproducible bit for bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    state_[0] = splitmix64(seed);
    state_[1] = splitmix64(state_[0] ^ 0x9e3779b97f4a7c15ULL);
  }

  std::uint64_t next_u64() {
    std::uint64_t x = state_[0];
    const std::uint64_t y = state_[1];
    state_[0] = y;
    x ^= x << 23;
    state_[1] = x ^ y ^ (x >> 17) ^ (y >> 26);
    return state_[1] + y;
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [lo, hi], both inclusive
  int uniform_int(int lo, int hi) {
    const double span = static_cast<double>(hi) - lo + 1.0;
    long long v = lo + static_cast<long long>(uniform() * span);
    if (v > hi) v = hi;
    return static_cast<int>(v);
  }

  // standard normal, Box-Muller
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  std::uint64_t state_[2];
};

}  // namespace rigidflow
