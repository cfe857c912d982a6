#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "histoboost/dataset.hpp"
#include "histoboost/histogram_set.hpp"
#include "histoboost/leaf.hpp"

namespace histoboost {

// Shape of one simulated workgroup. The local-memory footprint of a feature
// tuple's histograms is 4 features x 3 stats x 4 bytes x bin_count x banks
// and must fit local_mem_capacity.
struct WorkgroupConfig {
  int workgroup_size = 256;  // threads, a power of two
  int bin_count = 256;       // k
  int banks = 1;             // B; bank = tid % B
  bool fast_path = false;    // most-recently-used bin registers
  std::size_t local_mem_capacity = 65536;
  PrecisionMode precision = PrecisionMode::bits32;

  std::size_t local_mem_footprint() const {
    return static_cast<std::size_t>(4) * 3 * 4 * static_cast<std::size_t>(bin_count) *
           static_cast<std::size_t>(banks);
  }
  void validate() const;  // throws std::invalid_argument on violation
};

// Workgroups resident per compute unit under the footprint above.
int estimate_occupancy(int bin_count, int banks, std::size_t local_mem_capacity);

// Thread tid's accumulation role: offset s = tid mod 4 rotates the feature
// visit order, parity c = (tid / 4) mod 2 swaps gradient-first vs
// hessian-first so each cycle splits the workgroup across both stat kinds.
struct ThreadRole {
  int offset;
  int parity;
};
ThreadRole thread_role(int tid, int workgroup_size);

// Atomic-traffic accounting for one simulated build. A lock-step cycle is one
// accumulation line executed by all unmasked threads; its serialization cost
// is the largest number of threads hitting one (feature, stat, bank, bin)
// counter, and cycles issuing no atomics cost nothing.
struct ConflictReport {
  std::uint64_t total_atomic_updates = 0;
  std::uint64_t gradient_updates = 0;
  std::uint64_t hessian_updates = 0;
  std::uint64_t total_serialization_steps = 0;
  std::uint64_t ideal_steps = 0;  // ceil(updates / workgroup_size)
  std::uint64_t lockstep_cycles = 0;

  double conflict_ratio() const {
    return ideal_steps == 0 ? 1.0
                            : static_cast<double>(total_serialization_steps) /
                                  static_cast<double>(ideal_steps);
  }
  void merge(const ConflictReport& other);
  std::string to_text() const;
};

enum class Schedule { rotated, naive };

struct LockstepResult {
  HistogramSet entries;  // one per tuple slot, padding slots feature_id -1
  ConflictReport report;
};

// Sequential accumulation in leaf-index order; the correctness baseline every
// kernel is compared against. The span form reads an index-aligned slice
// without copying it.
HistogramEntry build_histogram_reference(const BinnedColumn& column, const LeafState& leaf,
                                         PrecisionMode precision);
HistogramEntry build_histogram_reference(const BinnedColumn& column,
                                         std::span<const row_index_t> indices,
                                         std::span<const double> gradients,
                                         std::span<const double> hessians,
                                         PrecisionMode precision);

// Simulated workgroup over one feature tuple. Thread tid handles leaf rows
// tid, tid + m, ...; per row it visits the tuple's features starting at its
// role offset and issues the gradient/hessian pair as two lock-step cycles
// with the stat order set by its role parity.
LockstepResult build_histograms_lockstep(const FeatureTupleArray& tuples, const LeafState& leaf,
                                         const WorkgroupConfig& config);

// Same traffic without the role rotation: every cycle sends all threads to
// the same feature and stat kind.
LockstepResult build_histograms_naive_lockstep(const FeatureTupleArray& tuples,
                                               const LeafState& leaf,
                                               const WorkgroupConfig& config);

// Shared lower-level entry: spans select a row-range slice of a leaf.
LockstepResult simulate_workgroup(const FeatureTupleArray& tuples,
                                  std::span<const row_index_t> indices,
                                  std::span<const double> gradients,
                                  std::span<const double> hessians,
                                  const WorkgroupConfig& config, Schedule schedule);

// Elementwise sum of private histograms over equal-shaped parts, in part
// order. Shape or precision mismatch is a hard failure.
HistogramEntry reduce_private_histograms(const std::vector<HistogramEntry>& parts);

// Nonzero-pair path for sparse features: accumulates the stored pairs that
// fall on the leaf, then assigns the remainder of the leaf totals to
// sentinel bin 0.
HistogramEntry build_sparse_histogram(const SparseColumn& column, const LeafState& leaf,
                                      PrecisionMode precision);

// All dense features of a packed layout through the lock-step simulator,
// folded back to original bins. rows_per_group 0 runs one workgroup per
// tuple; otherwise leaf rows are split into groups of that size whose
// private histograms are reduced in group order.
struct DenseLockstepResult {
  HistogramSet entries;  // aligned with dense feature order
  ConflictReport report;
};
DenseLockstepResult build_dense_histograms_lockstep(const PackedFeatures& packed,
                                                    const LeafState& leaf,
                                                    const WorkgroupConfig& config,
                                                    Schedule schedule,
                                                    std::size_t rows_per_group = 0);

// Training-path builder: reference accumulation over fixed 64Ki-row chunks
// farmed out to worker threads, reduced in chunk order, so results are
// bit-identical for any thread count. Sparse features take the pair path.
// Returns one entry per feature, indexed by feature id.
HistogramSet build_histograms_partitioned(const BinnedDataset& data, const LeafState& leaf,
                                          PrecisionMode precision, int max_workers = 0);

}  // namespace histoboost
