#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "histoboost/dataset.hpp"
#include "histoboost/histogram_set.hpp"

namespace histoboost {

// Equal-frequency boundaries over at most sample_cap sampled rows (sampling
// is deterministic in seed). NaN and raw zeros never occupy a non-sentinel
// bin, so both are excluded from the fit. When the sample has at most
// max_bins - 1 distinct values, each gets its own bin with boundaries at the
// midpoints between neighbors.
BinBoundaries compute_bin_boundaries(std::span<const double> values, int max_bins,
                                     int sample_cap = 200000, std::uint64_t seed = 0);

// Maps values to bins: zero and NaN to sentinel bin 0, anything else to the
// smallest bin whose upper boundary covers it.
BinnedColumn bin_column(std::span<const double> values, const BinBoundaries& boundaries,
                        int bin_capacity);

// Splits feature ids into (dense, sparse) by sentinel-bin fraction.
// A feature is sparse iff zero_fraction > sparse_threshold; threshold 1
// therefore forces everything dense.
std::pair<std::vector<int>, std::vector<int>> classify_features(
    const std::vector<BinnedColumn>& columns, double sparse_threshold);

SparseColumn to_sparse_column(const BinnedColumn& column);

// Interleaves the given columns into 32-bit tuple words, 4 features at 8 bits
// or 8 features at 4 bits. Partial trailing tuples are padded with constant
// sentinel-bin columns marked by feature id -1. 4-bit packing requires every
// column's bin_capacity <= 16.
std::vector<FeatureTupleArray> pack_feature_tuples(const std::vector<BinnedColumn>& columns,
                                                   const std::vector<int>& feature_ids,
                                                   BinWidth width);

// Spreads a low-cardinality feature over spare bins so concurrent updates of
// one logical bin land on expansion distinct counters. Identity when the
// occupied span k' covers at least half of bin_capacity.
std::pair<BinnedColumn, RedistributionInfo> redistribute_bins(const BinnedColumn& column);

// Collapses a histogram built over redistributed bins back to original bins
// (bin i = sum of redistributed bins [i*m, (i+1)*m - 1]).
HistogramEntry fold_histogram(const HistogramEntry& entry, const RedistributionInfo& info);

// Full dataset pipeline: boundaries + binning per column (concurrent across
// columns), then dense/sparse classification.
BinnedDataset bin_dataset(const RawDataset& raw, int max_bin, double sparse_threshold,
                          std::uint64_t seed, int sample_cap = 200000);

// Builds the tuple-packed layout for the lock-step kernels: dense features
// are redistributed (identity for well-populated ones) and packed, 4 bits
// per bin when max_bin == 16.
void prepare_packed(BinnedDataset& data);

}  // namespace histoboost
