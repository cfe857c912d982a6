#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <vector>

#include <doctest.h>

#include "histoboost/binning.hpp"
#include "histoboost/boosting.hpp"
#include "histoboost/io.hpp"
#include "histoboost/metrics.hpp"
#include "histoboost/random.hpp"
#include "oracles.hpp"

using namespace histoboost;

namespace {

RawDataset regression_dataset(std::size_t rows, int features, std::mt19937_64& rng) {
  RawDataset raw;
  raw.columns.assign(static_cast<std::size_t>(features), std::vector<double>(rows));
  for (auto& col : raw.columns) {
    for (auto& v : col) v = normal_double(rng);
  }
  raw.targets.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    raw.targets[i] = 2.0 * raw.columns[0][i] - raw.columns[1 % features][i] +
                     0.3 * normal_double(rng);
  }
  for (int f = 0; f < features; ++f) raw.feature_names.push_back("f" + std::to_string(f));
  return raw;
}

}  // namespace

TEST_CASE("squared loss derivatives and starting point") {
  auto loss = make_loss(LossKind::squared);
  CHECK(loss->grad_hess(3.0, 1.0) == std::pair{2.0, 1.0});
  CHECK(loss->grad_hess(-1.5, 0.5) == std::pair{-2.0, 1.0});
  CHECK(loss->initial_score(std::vector<double>{1, 2, 3, 6}) == 3.0);
  CHECK(loss->initial_score(std::vector<double>{}) == 0.0);
  CHECK(loss->mean_loss(std::vector<double>{1, 2}, std::vector<double>{0, 0}) == 1.25);
  CHECK_THROWS(loss->validate_targets(
      std::vector<double>{1.0, std::numeric_limits<double>::quiet_NaN()}));
  loss->validate_targets(std::vector<double>{-5.0, 17.25});  // anything finite is fine
}

TEST_CASE("logistic loss derivatives and starting point") {
  auto loss = make_loss(LossKind::logistic);
  auto [g1, h1] = loss->grad_hess(0.0, 1.0);
  CHECK(g1 == -0.5);
  CHECK(h1 == 0.25);
  auto [g0, h0] = loss->grad_hess(0.0, 0.0);
  CHECK(g0 == 0.5);
  CHECK(h0 == 0.25);

  CHECK(loss->initial_score(std::vector<double>{1, 1, 1, 0}) ==
        doctest::Approx(std::log(3.0)).epsilon(1e-15));
  CHECK(loss->initial_score(std::vector<double>{0, 0}) < -20.0);  // clamped, finite
  CHECK(std::isfinite(loss->initial_score(std::vector<double>{1, 1})));

  CHECK_THROWS(loss->validate_targets(std::vector<double>{0.0, 0.5}));
  CHECK_THROWS(loss->validate_targets(std::vector<double>{2.0}));
  loss->validate_targets(std::vector<double>{0.0, 1.0, 1.0});
}

TEST_CASE("logistic loss stays finite and floored at extreme scores") {
  auto loss = make_loss(LossKind::logistic);
  auto [g_hi, h_hi] = loss->grad_hess(1000.0, 1.0);
  CHECK(std::fabs(g_hi) < 1e-12);
  CHECK(h_hi == 1e-16);  // hessian floor keeps leaf values bounded
  auto [g_lo, h_lo] = loss->grad_hess(-1000.0, 0.0);
  CHECK(std::fabs(g_lo) < 1e-12);
  CHECK(h_lo == 1e-16);

  CHECK(loss->mean_loss(std::vector<double>{1000.0}, std::vector<double>{1.0}) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(loss->mean_loss(std::vector<double>{-1000.0}, std::vector<double>{1.0}) == 1000.0);
  CHECK(loss->mean_loss(std::vector<double>{1000.0}, std::vector<double>{0.0}) == 1000.0);
}

TEST_CASE("loss derivatives match finite differences of the loss") {
  for (LossKind kind : {LossKind::squared, LossKind::logistic}) {
    auto loss = make_loss(kind);
    std::vector<std::pair<double, double>> probes = {
        {0.3, 1.0}, {-1.7, 0.0}, {2.4, 1.0}, {0.0, 0.0}};
    for (auto [score, target] : probes) {
      auto at = [&](double delta) {
        double s = score + delta;
        return loss->mean_loss(std::span<const double>(&s, 1),
                               std::span<const double>(&target, 1));
      };
      auto [g, h] = loss->grad_hess(score, target);
      CHECK(g == doctest::Approx(oracle::numeric_gradient(at, 1e-6)).epsilon(1e-6));
      CHECK(h == doctest::Approx(oracle::numeric_hessian(at, 1e-3)).epsilon(1e-4));
    }
  }
}

TEST_CASE("loss names round-trip and unknown names fail") {
  CHECK(loss_from_name("squared") == LossKind::squared);
  CHECK(loss_from_name("logistic") == LossKind::logistic);
  CHECK(make_loss(LossKind::squared)->name() == "squared");
  CHECK(make_loss(LossKind::logistic)->name() == "logistic");
  CHECK_THROWS(loss_from_name("hinge"));
}

TEST_CASE("rank-based AUC handles ties and degenerate label sets") {
  CHECK(auc(std::vector<double>{0.1, 0.4, 0.35, 0.8},
            std::vector<double>{0, 0, 1, 1}) == 0.75);
  CHECK(auc(std::vector<double>{0.2, 0.2, 0.2, 0.2}, std::vector<double>{0, 1, 0, 1}) == 0.5);
  CHECK(auc(std::vector<double>{0.1, 0.9}, std::vector<double>{0, 1}) == 1.0);
  CHECK(auc(std::vector<double>{0.9, 0.1}, std::vector<double>{0, 1}) == 0.0);
  CHECK(std::isnan(auc(std::vector<double>{0.5, 0.6}, std::vector<double>{1, 1})));
  CHECK(auc(std::vector<double>{1.0, 1.0}, std::vector<double>{0, 1}) == 0.5);
}

TEST_CASE("rmse is the root mean squared error") {
  CHECK(rmse(std::vector<double>{1, 2}, std::vector<double>{0, 0}) ==
        doctest::Approx(std::sqrt(2.5)).epsilon(1e-15));
  CHECK(rmse(std::vector<double>{3, 3}, std::vector<double>{3, 3}) == 0.0);
}

TEST_CASE("one boosting step reproduces a hand-computed model") {
  RawDataset raw;
  raw.columns = {{1.0, 2.0, 8.0, 9.0}};
  raw.targets = {0.0, 0.0, 10.0, 10.0};
  raw.feature_names = {"x"};
  BinnedDataset data = bin_dataset(raw, 16, 1.0, 0);

  BoosterParams params;
  params.num_iterations = 1;
  params.learning_rate = 0.3;
  params.num_leaves = 2;
  Model model = train_model(data, raw.targets, LossKind::squared, params);

  CHECK(model.initial_score == 5.0);
  REQUIRE(model.trees.size() == 1);
  CHECK(model.trees[0].num_leaves() == 2);

  // Gradients at the start are {5, 5, -5, -5}; the split puts {1, 2} left
  // with leaf value -5 and {8, 9} right with leaf value +5.
  std::vector<double> preds = model.predict(raw);
  CHECK(preds == std::vector<double>{3.5, 3.5, 6.5, 6.5});
}

TEST_CASE("training drives the mean loss down monotonically here") {
  std::mt19937_64 rng(23);
  RawDataset raw = regression_dataset(800, 4, rng);
  BinnedDataset data = bin_dataset(raw, 64, 0.8, 0);

  BoosterParams params;
  params.num_iterations = 25;
  params.learning_rate = 0.2;
  params.num_leaves = 15;

  auto loss = make_loss(LossKind::squared);
  std::vector<double> curve;
  train_model(data, raw.targets, LossKind::squared, params,
              [&](int, std::span<const double> scores) {
                curve.push_back(loss->mean_loss(scores, raw.targets));
              });
  REQUIRE(curve.size() == 25);
  for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i] <= curve[i - 1]);
  CHECK(curve.back() < 0.5 * curve.front());
}

TEST_CASE("cached training scores equal model predictions bit for bit") {
  std::mt19937_64 rng(29);
  RawDataset raw = regression_dataset(600, 5, rng);

  for (LossKind kind : {LossKind::squared, LossKind::logistic}) {
    std::vector<double> targets = raw.targets;
    if (kind == LossKind::logistic) {
      for (auto& t : targets) t = t > 0.0 ? 1.0 : 0.0;
    }
    RawDataset task = raw;
    task.targets = targets;
    BinnedDataset data = bin_dataset(task, 256, 0.8, 0);

    BoosterParams params;
    params.num_iterations = 30;
    params.num_leaves = 9;
    params.learning_rate = 0.15;

    std::vector<double> cached;
    int calls = 0;
    Model model = train_model(data, targets, kind, params,
                              [&](int it, std::span<const double> scores) {
                                CHECK(it == calls);
                                ++calls;
                                cached.assign(scores.begin(), scores.end());
                              });
    CHECK(calls == 30);

    std::vector<double> fresh = model.predict(task);
    REQUIRE(fresh.size() == cached.size());
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      CHECK(fresh[i] == cached[i]);  // bitwise: same arithmetic sequence
    }
  }
}

TEST_CASE("the trained model is identical for any worker-thread count") {
  std::mt19937_64 rng(31);
  RawDataset raw = regression_dataset(1500, 6, rng);
  BinnedDataset data = bin_dataset(raw, 256, 0.8, 0);

  BoosterParams params;
  params.num_iterations = 8;
  params.num_leaves = 20;

  auto train_with_threads = [&](const char* n) {
    setenv("HISTOBOOST_THREADS", n, 1);
    Model m = train_model(data, raw.targets, LossKind::squared, params);
    unsetenv("HISTOBOOST_THREADS");
    return model_to_string(m);
  };
  std::string one = train_with_threads("1");
  std::string three = train_with_threads("3");
  CHECK(one == three);
}

TEST_CASE("boosting works end to end on a binary problem") {
  oracle::BinaryProblem problem = oracle::make_binary_problem(3000, 1500, 10, 37);
  BinnedDataset data = bin_dataset(problem.train, 64, 0.8, 0);

  BoosterParams params;
  params.num_iterations = 40;
  params.num_leaves = 15;
  params.learning_rate = 0.2;
  params.lambda = 1.0;
  Model model = train_model(data, problem.train.targets, LossKind::logistic, params);

  std::vector<double> train_preds = model.predict(problem.train);
  std::vector<double> test_preds = model.predict(problem.test);
  double train_auc = auc(train_preds, problem.train.targets);
  double test_auc = auc(test_preds, problem.test.targets);
  CHECK(train_auc > 0.85);
  CHECK(test_auc > 0.75);
  CHECK(train_auc >= test_auc - 0.02);
}
