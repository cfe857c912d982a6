#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "histoboost/dataset.hpp"

namespace histoboost {

// Rows of one leaf with their gradient/hessian pairs gathered into leaf order.
// indices is sorted ascending; the three arrays are index-aligned.
struct LeafState {
  std::vector<row_index_t> indices;
  std::vector<double> gradients;
  std::vector<double> hessians;
  double grad_total = 0.0;
  double hess_total = 0.0;

  std::int64_t count() const { return static_cast<std::int64_t>(indices.size()); }
};

LeafState gather_leaf_statistics(std::vector<row_index_t> indices,
                                 std::span<const double> gradients,
                                 std::span<const double> hessians);

}  // namespace histoboost
