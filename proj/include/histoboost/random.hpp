#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace histoboost {

// Deterministic helpers on top of mt19937_64. The engine's output sequence is
// fixed by the standard, and the transforms below avoid std::*_distribution,
// whose results vary between library implementations.

inline double uniform_double(std::mt19937_64& rng) {
  // 53 mantissa bits, result in [0, 1).
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  // Modulo bias is < 2^-53 for any bound used here.
  return rng() % bound;
}

inline double normal_double(std::mt19937_64& rng) {
  double u1 = uniform_double(rng);
  double u2 = uniform_double(rng);
  if (u1 < 0x1.0p-60) u1 = 0x1.0p-60;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

template <typename T>
void shuffle_vector(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace histoboost
