#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "histoboost/dataset.hpp"
#include "histoboost/histogram.hpp"

namespace histoboost {

// Synthetic bandwidth benchmark: histograms are rebuilt over row-index sets
// that emulate ever-deeper leaves. At depth D the row sample shrinks to
// n / 2^D sorted random rows, so reads scatter while staying ordered; D = 0
// touches every row sequentially.

struct BenchParams {
  std::int64_t rows = 1000000;  // n
  int features = 50;            // d
  int max_bin = 256;
  std::vector<int> depths = {0, 1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<Schedule> kernels = {Schedule::rotated, Schedule::naive};
  int workgroup_size = 256;
  int banks = 1;
  bool fast_path = false;
  int repetitions = 3;  // elapsed is the best of these
  std::uint64_t seed = 0;
};

struct BenchRow {
  std::string kernel;
  int depth = 0;
  std::int64_t indices_count = 0;
  double elapsed_s = 0.0;
  double bandwidth_bps = 0.0;  // indices * d * bytes_per_feature_value / elapsed
  ConflictReport report;
};

// Uniform random bins over the non-sentinel range [1, max_bin - 1]; all
// columns dense.
BinnedDataset gen_synthetic_bins(std::int64_t rows, int features, int max_bin,
                                 std::uint64_t seed);

// Sorted prefix of a random permutation of [0, rows): floor(rows / 2^depth)
// entries, no duplicates; depth 0 is the identity.
std::vector<row_index_t> leaf_index_sample(std::int64_t rows, int depth, std::uint64_t seed);

// Runs every (depth, kernel) cell, verifying each kernel result against the
// sequential reference (throws on mismatch). Configurations whose histogram
// footprint leaves no room for even one workgroup are skipped (empty rows
// are not emitted); the caller can detect that from the returned row count.
std::vector<BenchRow> run_bandwidth_benchmark(const BenchParams& params);

const char* schedule_name(Schedule s);

}  // namespace histoboost
