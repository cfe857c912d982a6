#include "histoboost/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace histoboost {

LeafState gather_leaf_statistics(std::vector<row_index_t> indices,
                                 std::span<const double> gradients,
                                 std::span<const double> hessians) {
  LeafState leaf;
  leaf.indices = std::move(indices);
  leaf.gradients.resize(leaf.indices.size());
  leaf.hessians.resize(leaf.indices.size());
  for (std::size_t i = 0; i < leaf.indices.size(); ++i) {
    leaf.gradients[i] = gradients[static_cast<std::size_t>(leaf.indices[i])];
    leaf.hessians[i] = hessians[static_cast<std::size_t>(leaf.indices[i])];
    leaf.grad_total += leaf.gradients[i];
    leaf.hess_total += leaf.hessians[i];
  }
  return leaf;
}

int Tree::num_leaves() const {
  int n = 0;
  for (const auto& node : nodes_) {
    if (node.is_leaf()) ++n;
  }
  return n;
}

double Tree::predict(const RawDataset& data, std::int64_t row) const {
  if (nodes_.empty()) return 0.0;
  int at = 0;
  while (!nodes_[static_cast<std::size_t>(at)].is_leaf()) {
    const TreeNode& node = nodes_[static_cast<std::size_t>(at)];
    double v = data.columns[static_cast<std::size_t>(node.feature)][static_cast<std::size_t>(row)];
    bool left = (v == 0.0 || std::isnan(v)) ? true : v <= node.threshold_value;
    at = left ? node.left : node.right;
  }
  return nodes_[static_cast<std::size_t>(at)].value;
}

double Tree::predict_binned(const BinnedDataset& data, std::int64_t row) const {
  if (nodes_.empty()) return 0.0;
  int at = 0;
  while (!nodes_[static_cast<std::size_t>(at)].is_leaf()) {
    const TreeNode& node = nodes_[static_cast<std::size_t>(at)];
    std::uint8_t b =
        data.columns[static_cast<std::size_t>(node.feature)].bins[static_cast<std::size_t>(row)];
    at = b <= node.threshold_bin ? node.left : node.right;
  }
  return nodes_[static_cast<std::size_t>(at)].value;
}

double optimal_leaf_value(double grad_sum, double hess_sum, double lambda, bool* degenerate) {
  double denom = hess_sum + lambda;
  if (degenerate) *degenerate = denom <= 0.0;
  if (denom <= 0.0) return 0.0;
  return -grad_sum / denom;
}

double split_gain(double left_grad, double left_hess, double right_grad, double right_hess,
                  double lambda) {
  double dl = left_hess + lambda;
  double dr = right_hess + lambda;
  double dp = left_hess + right_hess + lambda;
  if (dl <= 0.0 || dr <= 0.0 || dp <= 0.0) return 0.0;
  double g = left_grad + right_grad;
  return left_grad * left_grad / dl + right_grad * right_grad / dr - g * g / dp;
}

std::optional<SplitInfo> find_best_threshold(const HistogramEntry& histogram,
                                             const LeafTotals& parent,
                                             std::int64_t min_data_in_leaf, double lambda) {
  std::optional<SplitInfo> best;
  double left_grad = 0.0, left_hess = 0.0;
  std::int64_t left_count = 0;
  int last = static_cast<int>(histogram.bins.size()) - 1;
  for (int b = 0; b < last; ++b) {
    const HistogramBin& bin = histogram.bins[static_cast<std::size_t>(b)];
    left_grad += bin.grad_sum;
    left_hess += bin.hess_sum;
    left_count += bin.count;
    if (left_count < min_data_in_leaf) continue;
    std::int64_t right_count = parent.count - left_count;
    if (right_count < min_data_in_leaf) break;  // only shrinks from here
    double right_grad = parent.grad - left_grad;
    double right_hess = parent.hess - left_hess;
    double gain = split_gain(left_grad, left_hess, right_grad, right_hess, lambda);
    if (gain <= 0.0) continue;
    if (!best || gain > best->gain) {
      SplitInfo info;
      info.feature = histogram.feature_id;
      info.threshold_bin = b;
      info.gain = gain;
      info.left_grad = left_grad;
      info.left_hess = left_hess;
      info.left_count = left_count;
      info.right_grad = right_grad;
      info.right_hess = right_hess;
      info.right_count = right_count;
      info.left_value = optimal_leaf_value(left_grad, left_hess, lambda);
      info.right_value = optimal_leaf_value(right_grad, right_hess, lambda);
      best = info;
    }
  }
  return best;
}

std::pair<std::vector<row_index_t>, std::vector<row_index_t>> partition_leaf(
    const LeafState& leaf, const BinnedColumn& column, int threshold_bin) {
  std::vector<row_index_t> left, right;
  for (row_index_t row : leaf.indices) {
    if (column.bins[static_cast<std::size_t>(row)] <= threshold_bin) {
      left.push_back(row);
    } else {
      right.push_back(row);
    }
  }
  if (left.empty() || right.empty()) {
    throw std::logic_error("split produced an empty side");
  }
  return {std::move(left), std::move(right)};
}

namespace {

struct OpenLeaf {
  int node = -1;
  LeafState state;
  std::optional<SplitInfo> best;
};

HistogramSet build_leaf_histograms(const BinnedDataset& data, const LeafState& state,
                                   const GrowParams& params) {
  if (params.backend == HistogramBackend::partitioned) {
    return build_histograms_partitioned(data, state, params.precision);
  }
  if (data.packed.empty() && !data.dense_features.empty()) {
    throw std::logic_error("lockstep backend requires a packed dataset (prepare_packed)");
  }
  WorkgroupConfig cfg = params.workgroup;
  cfg.bin_count = data.max_bin;
  cfg.precision = params.precision;
  HistogramSet out(static_cast<std::size_t>(data.num_features()));
  DenseLockstepResult dense = build_dense_histograms_lockstep(
      data.packed, state, cfg, Schedule::rotated, params.rows_per_group);
  for (std::size_t i = 0; i < data.dense_features.size(); ++i) {
    out[static_cast<std::size_t>(data.dense_features[i])] = std::move(dense.entries[i]);
  }
  for (std::size_t s = 0; s < data.sparse_features.size(); ++s) {
    auto& entry = out[static_cast<std::size_t>(data.sparse_features[s])];
    entry = build_sparse_histogram(data.sparse_storage[s], state, params.precision);
    entry.feature_id = data.sparse_features[s];
  }
  return out;
}

std::optional<SplitInfo> find_best_split(const BinnedDataset& data, const LeafState& state,
                                         const GrowParams& params) {
  if (state.count() < 2 * params.min_data_in_leaf || state.count() < 2) return std::nullopt;
  HistogramSet hists = build_leaf_histograms(data, state, params);
  LeafTotals totals{state.grad_total, state.hess_total, state.count()};
  std::optional<SplitInfo> best;
  for (int f = 0; f < data.num_features(); ++f) {
    auto cand = find_best_threshold(hists[static_cast<std::size_t>(f)], totals,
                                    params.min_data_in_leaf, params.lambda);
    if (cand && (!best || cand->gain > best->gain)) best = cand;
  }
  if (best) {
    const auto& bounds = data.boundaries[static_cast<std::size_t>(best->feature)];
    best->threshold_value = best->threshold_bin == 0
                                ? -std::numeric_limits<double>::infinity()
                                : bounds.upper_bounds[static_cast<std::size_t>(
                                      best->threshold_bin - 1)];
  }
  return best;
}

}  // namespace

Tree grow_tree(const BinnedDataset& data, std::span<const double> gradients,
               std::span<const double> hessians, const GrowParams& params,
               std::vector<SplitInfo>* split_log) {
  if (params.num_leaves < 1) throw std::invalid_argument("num_leaves must be at least 1");

  Tree tree;
  std::vector<row_index_t> all(static_cast<std::size_t>(data.num_rows));
  std::iota(all.begin(), all.end(), 0);
  LeafState root = gather_leaf_statistics(std::move(all), gradients, hessians);

  TreeNode root_node;
  root_node.value = optimal_leaf_value(root.grad_total, root.hess_total, params.lambda);
  tree.nodes().push_back(root_node);

  std::vector<OpenLeaf> pool;
  if (params.num_leaves >= 2) {
    OpenLeaf open;
    open.node = 0;
    open.best = find_best_split(data, root, params);
    open.state = std::move(root);
    pool.push_back(std::move(open));
  }

  int leaves = 1;
  while (leaves < params.num_leaves) {
    int pick = -1;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (!pool[i].best) continue;
      if (pick < 0 || pool[i].best->gain > pool[static_cast<std::size_t>(pick)].best->gain) {
        pick = static_cast<int>(i);
      }
    }
    if (pick < 0) break;

    OpenLeaf chosen = std::move(pool[static_cast<std::size_t>(pick)]);
    pool.erase(pool.begin() + pick);
    const SplitInfo& split = *chosen.best;
    if (split_log) split_log->push_back(split);

    auto [left_rows, right_rows] = partition_leaf(
        chosen.state, data.columns[static_cast<std::size_t>(split.feature)], split.threshold_bin);

    TreeNode& parent = tree.nodes()[static_cast<std::size_t>(chosen.node)];
    parent.feature = split.feature;
    parent.threshold_bin = split.threshold_bin;
    parent.threshold_value = split.threshold_value;
    parent.left = static_cast<int>(tree.nodes().size());
    parent.right = parent.left + 1;
    parent.value = 0.0;

    int left_id = parent.left;
    int right_id = parent.right;
    tree.nodes().emplace_back();
    tree.nodes().emplace_back();
    ++leaves;

    OpenLeaf left_open, right_open;
    left_open.node = left_id;
    left_open.state = gather_leaf_statistics(std::move(left_rows), gradients, hessians);
    right_open.node = right_id;
    right_open.state = gather_leaf_statistics(std::move(right_rows), gradients, hessians);
    // Leaf values from the regathered child totals: exact in double even when
    // histogram accumulation ran in single precision.
    tree.nodes()[static_cast<std::size_t>(left_id)].value = optimal_leaf_value(
        left_open.state.grad_total, left_open.state.hess_total, params.lambda);
    tree.nodes()[static_cast<std::size_t>(right_id)].value = optimal_leaf_value(
        right_open.state.grad_total, right_open.state.hess_total, params.lambda);
    if (leaves < params.num_leaves) {
      left_open.best = find_best_split(data, left_open.state, params);
      right_open.best = find_best_split(data, right_open.state, params);
    }
    pool.push_back(std::move(left_open));
    pool.push_back(std::move(right_open));
  }
  return tree;
}

}  // namespace histoboost
