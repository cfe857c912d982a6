#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <doctest.h>

#include "histoboost/bench.hpp"

using namespace histoboost;

TEST_CASE("synthetic bins are deterministic, dense, and uniform") {
  BinnedDataset a = gen_synthetic_bins(100000, 3, 64, 7);
  BinnedDataset b = gen_synthetic_bins(100000, 3, 64, 7);
  BinnedDataset c = gen_synthetic_bins(100000, 3, 64, 8);
  REQUIRE(a.num_features() == 3);
  CHECK(a.columns[0].bins == b.columns[0].bins);
  CHECK(a.columns[0].bins != c.columns[0].bins);
  CHECK(a.dense_features.size() == 3);
  CHECK(a.sparse_features.empty());
  CHECK(a.max_bin == 64);
  CHECK(a.packed.empty());  // packing happens inside the benchmark run

  // Bins cover [1, 63] with no sentinel hits; each bin holds about n / 63.
  std::vector<std::int64_t> counts(64, 0);
  for (std::uint8_t bin : a.columns[0].bins) ++counts[bin];
  CHECK(counts[0] == 0);
  double expect = 100000.0 / 63.0;
  double sigma = std::sqrt(expect);
  for (int bin = 1; bin < 64; ++bin) {
    CHECK(std::fabs(static_cast<double>(counts[bin]) - expect) < 6.0 * sigma);
  }

  // Boundaries sit halfway between integer bin values, so binning the value
  // "w" reproduces bin w exactly.
  REQUIRE(a.boundaries[0].effective_bins() == 63);
  CHECK(a.boundaries[0].upper_bounds[0] == 1.5);
  CHECK(a.boundaries[0].upper_bounds[61] == 62.5);
}

TEST_CASE("leaf index samples shrink by powers of two and stay sorted") {
  CHECK(leaf_index_sample(1000, 0, 3).size() == 1000);
  std::vector<row_index_t> identity = leaf_index_sample(1000, 0, 3);
  for (std::size_t i = 0; i < identity.size(); ++i) {
    CHECK(identity[i] == static_cast<row_index_t>(i));
  }

  for (int depth : {1, 3, 7}) {
    std::vector<row_index_t> sample = leaf_index_sample(1000, depth, 3);
    CHECK(sample.size() == static_cast<std::size_t>(1000 >> depth));
    CHECK(std::is_sorted(sample.begin(), sample.end()));
    std::set<row_index_t> unique(sample.begin(), sample.end());
    CHECK(unique.size() == sample.size());
    CHECK(*sample.begin() >= 0);
    CHECK(*sample.rbegin() < 1000);
  }

  CHECK(leaf_index_sample(1000, 1, 3) == leaf_index_sample(1000, 1, 3));
  CHECK(leaf_index_sample(1000, 1, 3) != leaf_index_sample(1000, 1, 4));
  CHECK(leaf_index_sample(8, 3, 1).size() == 1);
}

TEST_CASE("the bandwidth benchmark emits one validated row per cell") {
  BenchParams params;
  params.rows = 4096;
  params.features = 8;  // one full 4-bit tuple, so no padding slots
  params.max_bin = 16;
  params.depths = {0, 2};
  params.repetitions = 1;

  std::vector<BenchRow> rows = run_bandwidth_benchmark(params);
  REQUIRE(rows.size() == 4);  // 2 depths x 2 kernels

  for (const BenchRow& row : rows) {
    CHECK((row.kernel == "rotated" || row.kernel == "naive"));
    CHECK((row.depth == 0 || row.depth == 2));
    CHECK(row.indices_count == (row.depth == 0 ? 4096 : 1024));
    CHECK(row.elapsed_s > 0.0);
    // 4-bit bins make a feature value half a byte.
    double bytes = static_cast<double>(row.indices_count) * 8 * 0.5;
    CHECK(row.bandwidth_bps == doctest::Approx(bytes / row.elapsed_s).epsilon(1e-12));
    CHECK(row.report.total_atomic_updates ==
          static_cast<std::uint64_t>(row.indices_count) * 8 * 2);
    CHECK(row.report.conflict_ratio() >= 1.0);
  }

  // Same cell grid, rotated listed first at each depth.
  CHECK(rows[0].kernel == "rotated");
  CHECK(rows[1].kernel == "naive");
  CHECK(rows[0].depth == rows[1].depth);
}

TEST_CASE("configurations that cannot host one workgroup are skipped") {
  BenchParams params;
  params.rows = 512;
  params.features = 4;
  params.max_bin = 256;
  params.banks = 8;  // 4 * 3 * 4 * 256 * 8 = 98304 bytes > 65536
  params.depths = {0};
  params.repetitions = 1;
  CHECK(run_bandwidth_benchmark(params).empty());
}

TEST_CASE("schedule names match the command-line vocabulary") {
  CHECK(schedule_name(Schedule::rotated) == std::string("rotated"));
  CHECK(schedule_name(Schedule::naive) == std::string("naive"));
}
