#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "histoboost/dataset.hpp"
#include "histoboost/losses.hpp"
#include "histoboost/tree.hpp"

namespace histoboost {

struct BoosterParams {
  int num_iterations = 100;
  double learning_rate = 0.1;
  int num_leaves = 31;
  int max_bin = 256;
  std::int64_t min_data_in_leaf = 1;
  double lambda = 0.0;
  double sparse_threshold = 0.8;
  PrecisionMode precision = PrecisionMode::bits32;
  HistogramBackend backend = HistogramBackend::partitioned;
  WorkgroupConfig workgroup;
  std::uint64_t seed = 0;
};

// prediction(x) = initial_score,  then += learning_rate * tree(x) per tree,
// in tree order. The training score cache follows the same sequence, so
// cached scores and predict() agree bitwise.
struct Model {
  LossKind loss = LossKind::squared;
  double learning_rate = 0.1;
  double initial_score = 0.0;
  std::vector<Tree> trees;

  double predict_row(const RawDataset& data, std::int64_t row) const;
  std::vector<double> predict(const RawDataset& data) const;
};

// Grows one tree on the gradients/hessians at the cached scores, appends it,
// and advances the cache (binned routing; identical arithmetic to predict).
void boost_one_iteration(Model& model, const BinnedDataset& data,
                         std::span<const double> targets, const BoosterParams& params,
                         std::vector<double>& scores);

using IterationCallback =
    std::function<void(int iteration, std::span<const double> scores)>;

// Full training loop; deterministic given params (thread count independent).
Model train_model(const BinnedDataset& data, std::span<const double> targets, LossKind loss,
                  const BoosterParams& params, const IterationCallback& after_iteration = {});

}  // namespace histoboost
