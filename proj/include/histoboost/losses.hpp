#pragma once

#include <memory>
#include <span>
#include <string_view>
#include <utility>

namespace histoboost {

enum class LossKind { squared, logistic };

// Second-order loss contract: per-sample gradient/hessian at the current
// score, a constant initial score, and target validation.
class Loss {
 public:
  virtual ~Loss() = default;
  virtual LossKind kind() const = 0;
  virtual std::string_view name() const = 0;
  // (d/ds) loss(s, y) and (d2/ds2) loss(s, y); the hessian is positive.
  virtual std::pair<double, double> grad_hess(double score, double target) const = 0;
  virtual double initial_score(std::span<const double> targets) const = 0;
  virtual void validate_targets(std::span<const double> targets) const = 0;
  // Mean training objective, for monitoring.
  virtual double mean_loss(std::span<const double> scores,
                           std::span<const double> targets) const = 0;
};

std::unique_ptr<Loss> make_loss(LossKind kind);
LossKind loss_from_name(std::string_view name);  // throws on unknown names

}  // namespace histoboost
