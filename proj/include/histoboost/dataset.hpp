#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace histoboost {

using row_index_t = std::int32_t;

// Upper boundaries of the non-sentinel bins of one feature. Bin b
// (1-based among non-sentinel bins) covers values v with
// upper_bounds[b-2] < v <= upper_bounds[b-1]; the last bin is open above.
// Bin 0 is reserved for raw zeros and missing values and has no boundary.
struct BinBoundaries {
  std::vector<double> upper_bounds;  // strictly increasing
  int effective_bins() const { return static_cast<int>(upper_bounds.size()) + 1; }
};

// One feature, discretized. Bin values fit a byte: capacities are 16/64/256.
struct BinnedColumn {
  std::vector<std::uint8_t> bins;
  int bin_capacity = 0;        // k; all values are < k
  double zero_fraction = 0.0;  // fraction of rows in sentinel bin 0
  bool is_sparse = false;
};

// Nonzero entries of a sparse feature as sorted (row, bin) pairs.
struct SparseColumn {
  std::vector<row_index_t> rows;  // strictly increasing
  std::vector<std::uint8_t> bins;
  int bin_capacity = 0;
};

// Bins of 4 (8-bit) or 8 (4-bit) features interleaved into one 32-bit word
// per row, so one load fetches a whole feature tuple.
struct FeatureTupleArray {
  std::vector<std::uint32_t> words;
  int features_per_word = 4;     // 4 or 8
  std::vector<int> feature_ids;  // length features_per_word; -1 marks padding

  int bits_per_bin() const { return 32 / features_per_word; }
  std::uint32_t bin_mask() const { return (1u << bits_per_bin()) - 1; }
  std::uint8_t bin_at(std::size_t row, int pos) const {
    return static_cast<std::uint8_t>((words[row] >> (bits_per_bin() * pos)) & bin_mask());
  }
};

// How a low-cardinality feature was spread over spare bins before packing.
// new_bin = old_bin * expansion + (row & mask); expansion == 1 means identity.
struct RedistributionInfo {
  std::uint32_t expansion = 1;  // m, a power of two
  std::uint32_t mask = 0;       // m - 1
  int original_effective_bins = 0;
};

enum class BinWidth { bits8, bits4 };

struct PackedFeatures {
  std::vector<FeatureTupleArray> tuples;
  std::vector<RedistributionInfo> redistribution;  // aligned with dense feature order
  BinWidth width = BinWidth::bits8;
  bool empty() const { return tuples.empty(); }
};

// Column-major raw matrix plus targets, as loaded from CSV/LibSVM.
// Missing values are NaN.
struct RawDataset {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> columns;
  std::vector<double> targets;

  std::int64_t num_rows() const {
    return columns.empty() ? static_cast<std::int64_t>(targets.size())
                           : static_cast<std::int64_t>(columns[0].size());
  }
  int num_features() const { return static_cast<int>(columns.size()); }
};

struct BinnedDataset {
  std::int64_t num_rows = 0;
  int max_bin = 0;  // k
  std::vector<BinnedColumn> columns;
  std::vector<BinBoundaries> boundaries;
  std::vector<int> dense_features;
  std::vector<int> sparse_features;
  std::vector<SparseColumn> sparse_storage;  // aligned with sparse_features
  PackedFeatures packed;                     // filled by prepare_packed()

  int num_features() const { return static_cast<int>(columns.size()); }
};

}  // namespace histoboost
