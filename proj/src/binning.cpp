#include "histoboost/binning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

#include "histoboost/parallel.hpp"
#include "histoboost/random.hpp"

namespace histoboost {

BinBoundaries compute_bin_boundaries(std::span<const double> values, int max_bins,
                                     int sample_cap, std::uint64_t seed) {
  if (max_bins < 2) throw std::invalid_argument("max_bins must be at least 2");
  if (sample_cap < 2) throw std::invalid_argument("sample_cap must be at least 2");

  std::vector<double> sample;
  sample.reserve(std::min<std::size_t>(values.size(), static_cast<std::size_t>(sample_cap)));
  for (double v : values) {
    if (v != 0.0 && !std::isnan(v)) sample.push_back(v);
  }
  if (sample.size() > static_cast<std::size_t>(sample_cap)) {
    // Partial Fisher-Yates: the first sample_cap slots become a uniform
    // without-replacement draw, deterministic in the seed.
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < static_cast<std::size_t>(sample_cap); ++i) {
      std::size_t j = i + static_cast<std::size_t>(uniform_below(rng, sample.size() - i));
      std::swap(sample[i], sample[j]);
    }
    sample.resize(static_cast<std::size_t>(sample_cap));
  }

  BinBoundaries out;
  if (sample.empty()) return out;
  std::sort(sample.begin(), sample.end());

  std::size_t n = sample.size();
  std::size_t distinct = 1;
  for (std::size_t i = 1; i < n; ++i) {
    if (sample[i] != sample[i - 1]) ++distinct;
  }

  int usable = max_bins - 1;  // bin 0 is the sentinel
  if (distinct <= static_cast<std::size_t>(usable)) {
    for (std::size_t i = 1; i < n; ++i) {
      if (sample[i] != sample[i - 1]) {
        out.upper_bounds.push_back((sample[i - 1] + sample[i]) / 2.0);
      }
    }
    return out;
  }

  // Equal-frequency cuts; duplicate runs spanning a cut collapse into one
  // boundary, so boundaries stay strictly increasing.
  for (int j = 1; j < usable; ++j) {
    std::size_t pos = static_cast<std::size_t>(
        static_cast<double>(j) * static_cast<double>(n) / static_cast<double>(usable));
    if (pos == 0 || pos >= n) continue;
    double lo = sample[pos - 1];
    double hi = sample[pos];
    if (lo < hi) {
      double mid = (lo + hi) / 2.0;
      if (out.upper_bounds.empty() || mid > out.upper_bounds.back()) {
        out.upper_bounds.push_back(mid);
      }
    }
  }
  return out;
}

BinnedColumn bin_column(std::span<const double> values, const BinBoundaries& boundaries,
                        int bin_capacity) {
  if (boundaries.effective_bins() > bin_capacity - 1) {
    throw std::invalid_argument("bin boundaries exceed bin capacity");
  }
  BinnedColumn col;
  col.bin_capacity = bin_capacity;
  col.bins.resize(values.size());
  const auto& ub = boundaries.upper_bounds;
  std::size_t sentinel = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    double v = values[i];
    if (v == 0.0 || std::isnan(v)) {
      col.bins[i] = 0;
      ++sentinel;
      continue;
    }
    auto it = std::lower_bound(ub.begin(), ub.end(), v);
    col.bins[i] = static_cast<std::uint8_t>((it - ub.begin()) + 1);
  }
  col.zero_fraction =
      values.empty() ? 0.0 : static_cast<double>(sentinel) / static_cast<double>(values.size());
  return col;
}

std::pair<std::vector<int>, std::vector<int>> classify_features(
    const std::vector<BinnedColumn>& columns, double sparse_threshold) {
  std::vector<int> dense, sparse;
  for (std::size_t f = 0; f < columns.size(); ++f) {
    if (columns[f].zero_fraction > sparse_threshold) {
      sparse.push_back(static_cast<int>(f));
    } else {
      dense.push_back(static_cast<int>(f));
    }
  }
  return {dense, sparse};
}

SparseColumn to_sparse_column(const BinnedColumn& column) {
  SparseColumn out;
  out.bin_capacity = column.bin_capacity;
  for (std::size_t i = 0; i < column.bins.size(); ++i) {
    if (column.bins[i] != 0) {
      out.rows.push_back(static_cast<row_index_t>(i));
      out.bins.push_back(column.bins[i]);
    }
  }
  return out;
}

std::vector<FeatureTupleArray> pack_feature_tuples(const std::vector<BinnedColumn>& columns,
                                                   const std::vector<int>& feature_ids,
                                                   BinWidth width) {
  const int per_word = width == BinWidth::bits4 ? 8 : 4;
  const int bits = 32 / per_word;
  std::size_t rows = 0;
  for (int f : feature_ids) {
    const auto& col = columns.at(static_cast<std::size_t>(f));
    if (width == BinWidth::bits4 && col.bin_capacity > 16) {
      throw std::invalid_argument("4-bit packing requires bin capacity <= 16");
    }
    if (rows == 0) rows = col.bins.size();
    if (col.bins.size() != rows) {
      throw std::invalid_argument("columns disagree on row count");
    }
  }

  std::size_t tuple_count = (feature_ids.size() + per_word - 1) / per_word;
  std::vector<FeatureTupleArray> out(tuple_count);
  for (std::size_t t = 0; t < tuple_count; ++t) {
    FeatureTupleArray& arr = out[t];
    arr.features_per_word = per_word;
    arr.feature_ids.assign(per_word, -1);
    arr.words.assign(rows, 0);
    for (int p = 0; p < per_word; ++p) {
      std::size_t slot = t * per_word + static_cast<std::size_t>(p);
      if (slot >= feature_ids.size()) break;  // padding keeps bin 0 everywhere
      arr.feature_ids[p] = feature_ids[slot];
      const auto& bins = columns[static_cast<std::size_t>(feature_ids[slot])].bins;
      for (std::size_t i = 0; i < rows; ++i) {
        arr.words[i] |= static_cast<std::uint32_t>(bins[i]) << (bits * p);
      }
    }
  }
  return out;
}

std::pair<BinnedColumn, RedistributionInfo> redistribute_bins(const BinnedColumn& column) {
  RedistributionInfo info;
  int max_bin = -1;
  for (std::uint8_t b : column.bins) max_bin = std::max(max_bin, static_cast<int>(b));
  int spanned = max_bin + 1;  // k': every occupied bin index is below this
  info.original_effective_bins = std::max(spanned, 1);

  int k = column.bin_capacity;
  if (column.bins.empty() || spanned * 2 >= k) return {column, info};

  int expansion = 1;
  while (expansion * 2 * spanned <= k) expansion *= 2;
  info.expansion = static_cast<std::uint32_t>(expansion);
  info.mask = info.expansion - 1;

  BinnedColumn spread = column;
  for (std::size_t i = 0; i < spread.bins.size(); ++i) {
    spread.bins[i] = static_cast<std::uint8_t>(
        static_cast<std::uint32_t>(column.bins[i]) * info.expansion +
        (static_cast<std::uint32_t>(i) & info.mask));
  }
  return {spread, info};
}

HistogramEntry fold_histogram(const HistogramEntry& entry, const RedistributionInfo& info) {
  if (info.expansion == 1) return entry;
  HistogramEntry out;
  out.feature_id = entry.feature_id;
  out.precision = entry.precision;
  out.bins.assign(entry.bins.size(), HistogramBin{});
  std::size_t m = info.expansion;
  for (std::size_t i = 0; i * m < entry.bins.size(); ++i) {
    HistogramBin acc;
    std::size_t end = std::min(entry.bins.size(), (i + 1) * m);
    for (std::size_t j = i * m; j < end; ++j) {
      acc.grad_sum += entry.bins[j].grad_sum;
      acc.hess_sum += entry.bins[j].hess_sum;
      acc.count += entry.bins[j].count;
    }
    out.bins[i] = acc;
  }
  return out;
}

BinnedDataset bin_dataset(const RawDataset& raw, int max_bin, double sparse_threshold,
                          std::uint64_t seed, int sample_cap) {
  BinnedDataset data;
  data.num_rows = raw.num_rows();
  data.max_bin = max_bin;
  data.columns.resize(raw.columns.size());
  data.boundaries.resize(raw.columns.size());

  parallel_for(raw.columns.size(), [&](std::size_t f) {
    data.boundaries[f] =
        compute_bin_boundaries(raw.columns[f], max_bin, sample_cap, seed + f);
    data.columns[f] = bin_column(raw.columns[f], data.boundaries[f], max_bin);
  });

  auto [dense, sparse] = classify_features(data.columns, sparse_threshold);
  data.dense_features = std::move(dense);
  data.sparse_features = std::move(sparse);
  for (int f : data.sparse_features) {
    data.columns[static_cast<std::size_t>(f)].is_sparse = true;
    data.sparse_storage.push_back(to_sparse_column(data.columns[static_cast<std::size_t>(f)]));
  }
  return data;
}

void prepare_packed(BinnedDataset& data) {
  data.packed = PackedFeatures{};
  data.packed.width = data.max_bin == 16 ? BinWidth::bits4 : BinWidth::bits8;

  std::vector<BinnedColumn> spread(data.dense_features.size());
  std::vector<int> local_ids(data.dense_features.size());
  data.packed.redistribution.resize(data.dense_features.size());
  for (std::size_t i = 0; i < data.dense_features.size(); ++i) {
    auto [col, info] =
        redistribute_bins(data.columns[static_cast<std::size_t>(data.dense_features[i])]);
    spread[i] = std::move(col);
    data.packed.redistribution[i] = info;
    local_ids[i] = static_cast<int>(i);
  }
  data.packed.tuples = pack_feature_tuples(spread, local_ids, data.packed.width);
  // Rewrite tuple slots to global feature ids (the packer saw local indices).
  for (auto& arr : data.packed.tuples) {
    for (auto& id : arr.feature_ids) {
      if (id >= 0) id = data.dense_features[static_cast<std::size_t>(id)];
    }
  }
}

}  // namespace histoboost
