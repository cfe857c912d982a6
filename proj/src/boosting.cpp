#include "histoboost/boosting.hpp"

#include <stdexcept>

#include "histoboost/binning.hpp"
#include "histoboost/parallel.hpp"

namespace histoboost {

double Model::predict_row(const RawDataset& data, std::int64_t row) const {
  double score = initial_score;
  for (const Tree& tree : trees) {
    score += learning_rate * tree.predict(data, row);
  }
  return score;
}

std::vector<double> Model::predict(const RawDataset& data) const {
  std::vector<double> out(static_cast<std::size_t>(data.num_rows()));
  parallel_for(out.size(), [&](std::size_t i) {
    out[i] = predict_row(data, static_cast<std::int64_t>(i));
  });
  return out;
}

void boost_one_iteration(Model& model, const BinnedDataset& data,
                         std::span<const double> targets, const BoosterParams& params,
                         std::vector<double>& scores) {
  auto loss = make_loss(model.loss);
  std::size_t n = static_cast<std::size_t>(data.num_rows);
  std::vector<double> grad(n), hess(n);
  parallel_for(n, [&](std::size_t i) {
    auto [g, h] = loss->grad_hess(scores[i], targets[i]);
    grad[i] = g;
    hess[i] = h;
  });

  GrowParams gp;
  gp.num_leaves = params.num_leaves;
  gp.min_data_in_leaf = params.min_data_in_leaf;
  gp.lambda = params.lambda;
  gp.precision = params.precision;
  gp.backend = params.backend;
  gp.workgroup = params.workgroup;
  model.trees.push_back(grow_tree(data, grad, hess, gp));

  const Tree& tree = model.trees.back();
  parallel_for(n, [&](std::size_t i) {
    scores[i] += model.learning_rate * tree.predict_binned(data, static_cast<std::int64_t>(i));
  });
}

Model train_model(const BinnedDataset& data, std::span<const double> targets, LossKind loss_kind,
                  const BoosterParams& params, const IterationCallback& after_iteration) {
  if (static_cast<std::int64_t>(targets.size()) != data.num_rows) {
    throw std::invalid_argument("targets do not match dataset rows");
  }
  auto loss = make_loss(loss_kind);
  loss->validate_targets(targets);

  Model model;
  model.loss = loss_kind;
  model.learning_rate = params.learning_rate;
  model.initial_score = loss->initial_score(targets);

  std::vector<double> scores(targets.size(), model.initial_score);
  for (int it = 0; it < params.num_iterations; ++it) {
    boost_one_iteration(model, data, targets, params, scores);
    if (after_iteration) after_iteration(it, scores);
  }
  return model;
}

}  // namespace histoboost
