#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "histoboost/dataset.hpp"
#include "histoboost/histogram.hpp"
#include "histoboost/leaf.hpp"

namespace histoboost {

struct SplitInfo {
  int feature = -1;
  int threshold_bin = -1;
  double threshold_value = 0.0;  // raw-value boundary; -inf when only bin 0 goes left
  double gain = 0.0;
  double left_grad = 0.0, left_hess = 0.0;
  double right_grad = 0.0, right_hess = 0.0;
  std::int64_t left_count = 0, right_count = 0;
  double left_value = 0.0, right_value = 0.0;
};

struct TreeNode {
  int feature = -1;  // negative on leaves
  double threshold_value = 0.0;
  int threshold_bin = -1;  // -1 on loaded models; routing uses threshold_value
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
};

// Rows route left when the feature value is missing or zero (sentinel bin 0)
// or when value <= threshold_value.
class Tree {
 public:
  std::vector<TreeNode>& nodes() { return nodes_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }

  int num_leaves() const;
  double predict(const RawDataset& data, std::int64_t row) const;
  double predict_binned(const BinnedDataset& data, std::int64_t row) const;

 private:
  std::vector<TreeNode> nodes_;
};

// value = -G / (H + lambda); H + lambda <= 0 reports a degenerate leaf worth 0.
double optimal_leaf_value(double grad_sum, double hess_sum, double lambda,
                          bool* degenerate = nullptr);

// Objective reduction of a binary partition; 0 when a denominator degenerates.
double split_gain(double left_grad, double left_hess, double right_grad, double right_hess,
                  double lambda);

struct LeafTotals {
  double grad = 0.0;
  double hess = 0.0;
  std::int64_t count = 0;
};

// Scans bins 0..k-2 as candidate thresholds (left = bins <= b); right-side
// stats come from the parent totals. Returns the positive-gain candidate with
// the highest gain, ties to the smallest bin, or nothing.
std::optional<SplitInfo> find_best_threshold(const HistogramEntry& histogram,
                                             const LeafTotals& parent,
                                             std::int64_t min_data_in_leaf, double lambda);

// Stable split of sorted leaf indices by bin <= threshold_bin. An empty side
// is a hard failure.
std::pair<std::vector<row_index_t>, std::vector<row_index_t>> partition_leaf(
    const LeafState& leaf, const BinnedColumn& column, int threshold_bin);

enum class HistogramBackend { partitioned, lockstep };

struct GrowParams {
  int num_leaves = 31;
  std::int64_t min_data_in_leaf = 1;
  double lambda = 0.0;
  PrecisionMode precision = PrecisionMode::bits32;
  HistogramBackend backend = HistogramBackend::partitioned;
  WorkgroupConfig workgroup;          // lockstep backend only
  std::size_t rows_per_group = 0;     // lockstep backend only
};

// Leaf-wise best-first growth: keeps every open leaf's best split in a pool
// and always splits the highest-gain one until num_leaves is reached or no
// candidate has positive gain. Ties resolve to the lower feature id, then the
// lower threshold bin, then the older leaf. Appends executed splits to
// split_log when given.
Tree grow_tree(const BinnedDataset& data, std::span<const double> gradients,
               std::span<const double> hessians, const GrowParams& params,
               std::vector<SplitInfo>* split_log = nullptr);

}  // namespace histoboost
