#include "histoboost/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace histoboost {

namespace {

constexpr double kHessianFloor = 1e-16;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(1 + e^x) without overflow for large |x|.
double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x))); }

class SquaredLoss final : public Loss {
 public:
  LossKind kind() const override { return LossKind::squared; }
  std::string_view name() const override { return "squared"; }

  std::pair<double, double> grad_hess(double score, double target) const override {
    return {score - target, 1.0};
  }

  double initial_score(std::span<const double> targets) const override {
    if (targets.empty()) return 0.0;
    double sum = 0.0;
    for (double t : targets) sum += t;
    return sum / static_cast<double>(targets.size());
  }

  void validate_targets(std::span<const double> targets) const override {
    for (double t : targets) {
      if (std::isnan(t)) throw std::invalid_argument("squared loss target is NaN");
    }
  }

  double mean_loss(std::span<const double> scores,
                   std::span<const double> targets) const override {
    double sum = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      double d = scores[i] - targets[i];
      sum += 0.5 * d * d;
    }
    return scores.empty() ? 0.0 : sum / static_cast<double>(scores.size());
  }
};

class LogisticLoss final : public Loss {
 public:
  LossKind kind() const override { return LossKind::logistic; }
  std::string_view name() const override { return "logistic"; }

  std::pair<double, double> grad_hess(double score, double target) const override {
    double p = sigmoid(score);
    return {p - target, std::max(p * (1.0 - p), kHessianFloor)};
  }

  double initial_score(std::span<const double> targets) const override {
    if (targets.empty()) return 0.0;
    double mean = 0.0;
    for (double t : targets) mean += t;
    mean /= static_cast<double>(targets.size());
    mean = std::clamp(mean, 1e-12, 1.0 - 1e-12);
    return std::log(mean / (1.0 - mean));
  }

  void validate_targets(std::span<const double> targets) const override {
    for (double t : targets) {
      if (t != 0.0 && t != 1.0) {
        throw std::invalid_argument("logistic loss targets must be 0 or 1, got " +
                                    std::to_string(t));
      }
    }
  }

  double mean_loss(std::span<const double> scores,
                   std::span<const double> targets) const override {
    double sum = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      sum += softplus(scores[i]) - targets[i] * scores[i];
    }
    return scores.empty() ? 0.0 : sum / static_cast<double>(scores.size());
  }
};

}  // namespace

std::unique_ptr<Loss> make_loss(LossKind kind) {
  if (kind == LossKind::squared) return std::make_unique<SquaredLoss>();
  return std::make_unique<LogisticLoss>();
}

LossKind loss_from_name(std::string_view name) {
  if (name == "squared") return LossKind::squared;
  if (name == "logistic") return LossKind::logistic;
  throw std::invalid_argument("unknown loss: " + std::string(name));
}

}  // namespace histoboost
