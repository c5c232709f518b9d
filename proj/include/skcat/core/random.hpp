#pragma once

#include <cstdint>
#include <random>

#include "skcat/core/types.hpp"

namespace skcat {

// SplitMix64 finalizer; used to give each trajectory its own independent
// stream so results do not depend on how work is split across threads.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t master, std::uint64_t index) {
  return Rng(derive_seed(master, index));
}

// Haar-random pure state of dimension n (normalized complex Gaussian vector).
inline CVec haar_state(Rng& rng, Eigen::Index n) {
  std::normal_distribution<double> g(0.0, 1.0);
  CVec v(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double re = g(rng);
    const double im = g(rng);
    v(k) = cplx(re, im);
  }
  return v / v.norm();
}

}  // namespace skcat
