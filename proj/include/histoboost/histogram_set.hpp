#pragma once

#include <cstdint>
#include <vector>

namespace histoboost {

// Histogram statistics are accumulated in 32-bit floats by default; the
// 64-bit switch trades speed for exactness on deep trees. Counts are always
// 64-bit integers, and finished histograms are exported as doubles.
enum class PrecisionMode { bits32, bits64 };

inline const char* precision_name(PrecisionMode p) {
  return p == PrecisionMode::bits32 ? "single" : "double";
}

struct HistogramBin {
  double grad_sum = 0.0;
  double hess_sum = 0.0;
  std::int64_t count = 0;
};

struct HistogramEntry {
  int feature_id = -1;
  PrecisionMode precision = PrecisionMode::bits32;
  std::vector<HistogramBin> bins;
};

using HistogramSet = std::vector<HistogramEntry>;

// Accumulated float sums are compared relative to their own magnitude with a
// floor of 1 so near-cancelled bins don't demand impossible precision.
inline double stats_tolerance(PrecisionMode p) {
  return p == PrecisionMode::bits32 ? 1e-4 : 1e-12;
}

bool stats_close(double a, double b, double tolerance);

// Counts exact, float stats within tolerance, same shape.
bool histograms_equivalent(const HistogramEntry& a, const HistogramEntry& b, double tolerance);

}  // namespace histoboost
