#pragma once

#include <span>

namespace histoboost {

// Rank-statistic AUC with tie-averaged ranks; labels are {0, 1}.
// NaN when either class is absent.
double auc(std::span<const double> scores, std::span<const double> labels);

double rmse(std::span<const double> predictions, std::span<const double> targets);

}  // namespace histoboost
