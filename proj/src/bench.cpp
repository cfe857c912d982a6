#include "histoboost/bench.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>
#include <stdexcept>

#include "histoboost/binning.hpp"
#include "histoboost/random.hpp"
#include "histoboost/tree.hpp"

namespace histoboost {

const char* schedule_name(Schedule s) { return s == Schedule::rotated ? "rotated" : "naive"; }

BinnedDataset gen_synthetic_bins(std::int64_t rows, int features, int max_bin,
                                 std::uint64_t seed) {
  BinnedDataset data;
  data.num_rows = rows;
  data.max_bin = max_bin;
  data.columns.resize(static_cast<std::size_t>(features));
  data.boundaries.resize(static_cast<std::size_t>(features));
  for (int f = 0; f < features; ++f) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(f) * 0x9e3779b97f4a7c15ULL);
    BinnedColumn& col = data.columns[static_cast<std::size_t>(f)];
    col.bin_capacity = max_bin;
    col.bins.resize(static_cast<std::size_t>(rows));
    for (auto& b : col.bins) {
      b = static_cast<std::uint8_t>(1 + uniform_below(rng, static_cast<std::uint64_t>(max_bin - 1)));
    }
    // Integer-grid boundaries so bin b covers value b exactly.
    auto& ub = data.boundaries[static_cast<std::size_t>(f)].upper_bounds;
    for (int b = 1; b < max_bin - 1; ++b) ub.push_back(b + 0.5);
    data.dense_features.push_back(f);
  }
  return data;
}

std::vector<row_index_t> leaf_index_sample(std::int64_t rows, int depth, std::uint64_t seed) {
  if (depth < 0 || depth > 62) throw std::invalid_argument("depth out of range");
  std::int64_t take = rows >> depth;
  if (take < 1) throw std::invalid_argument("depth leaves no rows to sample");
  std::vector<row_index_t> perm(static_cast<std::size_t>(rows));
  std::iota(perm.begin(), perm.end(), 0);
  if (depth > 0) {
    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates: only the kept prefix needs shuffling.
    for (std::size_t i = 0; i < static_cast<std::size_t>(take); ++i) {
      std::size_t j = i + static_cast<std::size_t>(uniform_below(rng, perm.size() - i));
      std::swap(perm[i], perm[j]);
    }
    perm.resize(static_cast<std::size_t>(take));
    std::sort(perm.begin(), perm.end());
  }
  return perm;
}

std::vector<BenchRow> run_bandwidth_benchmark(const BenchParams& params) {
  if (estimate_occupancy(params.max_bin, params.banks, WorkgroupConfig{}.local_mem_capacity) <
      1) {
    return {};  // footprint leaves no room for a single workgroup
  }

  BinnedDataset data =
      gen_synthetic_bins(params.rows, params.features, params.max_bin, params.seed);
  prepare_packed(data);

  std::mt19937_64 rng(params.seed ^ 0xdeadbeefcafef00dULL);
  std::vector<double> grad(static_cast<std::size_t>(params.rows));
  std::vector<double> hess(static_cast<std::size_t>(params.rows));
  for (auto& g : grad) g = 2.0 * uniform_double(rng) - 1.0;
  for (auto& h : hess) h = uniform_double(rng);

  // Effective bandwidth describes streaming data that is far larger than any
  // cache, so every timed repetition starts cold: a write pass over a
  // cache-sized scratch buffer evicts the previous repetition's working set.
  std::vector<std::uint64_t> evict(std::size_t{8} << 20);  // 64 MiB
  std::uint64_t evict_sum = 0;
  auto drop_caches = [&] {
    for (auto& x : evict) x = x * 2862933555777941757ULL + 3037000493ULL;
    evict_sum ^= evict[evict.size() / 2];
  };

  WorkgroupConfig cfg;
  cfg.workgroup_size = params.workgroup_size;
  cfg.bin_count = params.max_bin;
  cfg.banks = params.banks;
  cfg.fast_path = params.fast_path;
  cfg.validate();

  double bytes_per_value = data.packed.width == BinWidth::bits4 ? 0.5 : 1.0;

  std::vector<BenchRow> rows;
  for (int depth : params.depths) {
    auto indices = leaf_index_sample(params.rows, depth,
                                     params.seed + 0x51ed270b * static_cast<std::uint64_t>(depth));
    LeafState leaf = gather_leaf_statistics(std::move(indices), grad, hess);

    std::vector<HistogramEntry> reference(data.columns.size());
    for (std::size_t f = 0; f < data.columns.size(); ++f) {
      reference[f] = build_histogram_reference(data.columns[f], leaf, cfg.precision);
    }

    for (Schedule kernel : params.kernels) {
      BenchRow row;
      row.kernel = schedule_name(kernel);
      row.depth = depth;
      row.indices_count = leaf.count();

      DenseLockstepResult result;
      double best = 0.0;
      for (int rep = 0; rep < std::max(1, params.repetitions); ++rep) {
        drop_caches();
        auto t0 = std::chrono::steady_clock::now();
        result = build_dense_histograms_lockstep(data.packed, leaf, cfg, kernel);
        auto t1 = std::chrono::steady_clock::now();
        double dt = std::chrono::duration<double>(t1 - t0).count();
        if (rep == 0 || dt < best) best = dt;
      }

      for (std::size_t f = 0; f < data.columns.size(); ++f) {
        if (!histograms_equivalent(result.entries[f], reference[f],
                                   stats_tolerance(cfg.precision))) {
          throw std::runtime_error("kernel/reference mismatch at depth " +
                                   std::to_string(depth));
        }
      }

      row.elapsed_s = best;
      row.bandwidth_bps = static_cast<double>(row.indices_count) *
                          static_cast<double>(params.features) * bytes_per_value / best;
      row.report = result.report;
      rows.push_back(std::move(row));
    }
  }
  volatile std::uint64_t evict_sink = evict_sum;  // keeps the eviction writes live
  (void)evict_sink;
  return rows;
}

}  // namespace histoboost
