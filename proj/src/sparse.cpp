#include <cstdint>

#include "histoboost/histogram.hpp"

namespace histoboost {

namespace {

template <typename Acc>
HistogramEntry sparse_impl(const SparseColumn& column, const LeafState& leaf,
                           PrecisionMode precision) {
  HistogramEntry entry;
  entry.precision = precision;
  entry.bins.resize(static_cast<std::size_t>(column.bin_capacity));
  std::vector<Acc> grad(entry.bins.size(), Acc(0));
  std::vector<Acc> hess(entry.bins.size(), Acc(0));

  // Both index lists are sorted; march them together.
  std::size_t p = 0;
  std::int64_t matched = 0;
  Acc matched_grad(0), matched_hess(0);
  for (std::size_t i = 0; i < leaf.indices.size(); ++i) {
    row_index_t row = leaf.indices[i];
    while (p < column.rows.size() && column.rows[p] < row) ++p;
    if (p == column.rows.size()) break;
    if (column.rows[p] != row) continue;
    std::uint8_t b = column.bins[p];
    Acc g = static_cast<Acc>(leaf.gradients[i]);
    Acc h = static_cast<Acc>(leaf.hessians[i]);
    grad[b] += g;
    hess[b] += h;
    entry.bins[b].count += 1;
    matched_grad += g;
    matched_hess += h;
    ++matched;
  }

  // Every leaf row not present among the nonzero pairs sits in sentinel bin 0.
  grad[0] += static_cast<Acc>(leaf.grad_total) - matched_grad;
  hess[0] += static_cast<Acc>(leaf.hess_total) - matched_hess;
  entry.bins[0].count += leaf.count() - matched;

  for (std::size_t b = 0; b < entry.bins.size(); ++b) {
    entry.bins[b].grad_sum = static_cast<double>(grad[b]);
    entry.bins[b].hess_sum = static_cast<double>(hess[b]);
  }
  return entry;
}

}  // namespace

HistogramEntry build_sparse_histogram(const SparseColumn& column, const LeafState& leaf,
                                      PrecisionMode precision) {
  return precision == PrecisionMode::bits32 ? sparse_impl<float>(column, leaf, precision)
                                            : sparse_impl<double>(column, leaf, precision);
}

}  // namespace histoboost
