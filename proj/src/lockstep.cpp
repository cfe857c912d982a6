#include <cstdint>
#include <stdexcept>

#include "histoboost/binning.hpp"
#include "histoboost/histogram.hpp"
#include "histoboost/parallel.hpp"

namespace histoboost {

namespace {

// Per (thread, feature) most-recently-used bin register. While consecutive
// rows of a thread repeat a bin, stats pool here and no atomics are issued;
// the pooled values flush to the old bin when the bin changes and once more
// after the row loop.
template <typename Acc>
struct MruRegister {
  int bin = -1;
  Acc grad = 0;
  Acc hess = 0;
  std::int64_t count = 0;
};

// Tracks, within one lock-step cycle, how many threads hit each
// (feature, stat, bank, bin) counter. Epoch stamps avoid clearing between
// cycles.
class CycleTally {
 public:
  explicit CycleTally(std::size_t targets) : mult_(targets, 0), stamp_(targets, 0) {}

  void begin_cycle() {
    ++epoch_;
    max_mult_ = 0;
  }
  void hit(std::size_t target) {
    if (stamp_[target] != epoch_) {
      stamp_[target] = epoch_;
      mult_[target] = 1;
    } else {
      ++mult_[target];
    }
    if (mult_[target] > max_mult_) max_mult_ = mult_[target];
  }
  std::uint32_t max_mult() const { return max_mult_; }

 private:
  std::vector<std::uint32_t> mult_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
  std::uint32_t max_mult_ = 0;
};

template <typename Acc>
class WorkgroupSim {
 public:
  WorkgroupSim(const FeatureTupleArray& tuples, const WorkgroupConfig& cfg, Schedule schedule)
      : tuples_(tuples),
        cfg_(cfg),
        schedule_(schedule),
        features_(tuples.features_per_word),
        bits_(tuples.bits_per_bin()),
        bin_mask_(tuples.bin_mask()),
        k_(cfg.bin_count),
        m_(cfg.workgroup_size),
        banks_(cfg.banks),
        stats_(static_cast<std::size_t>(features_) * 2 * banks_ * k_, Acc(0)),
        counts_(static_cast<std::size_t>(features_) * banks_ * k_, 0),
        tally_(static_cast<std::size_t>(features_) * 2 * banks_ * k_),
        regs_(static_cast<std::size_t>(m_) * features_),
        word_(static_cast<std::size_t>(m_)),
        grad_(static_cast<std::size_t>(m_)),
        hess_(static_cast<std::size_t>(m_)) {}

  LockstepResult run(std::span<const row_index_t> indices, std::span<const double> gradients,
                     std::span<const double> hessians) {
    std::size_t rows = indices.size();
    std::size_t iters = (rows + m_ - 1) / m_;
    for (std::size_t iter = 0; iter < iters; ++iter) {
      int active = static_cast<int>(std::min<std::size_t>(m_, rows - iter * m_));
      for (int tid = 0; tid < active; ++tid) {
        std::size_t i = iter * m_ + static_cast<std::size_t>(tid);
        word_[static_cast<std::size_t>(tid)] =
            tuples_.words[static_cast<std::size_t>(indices[i])];
        grad_[static_cast<std::size_t>(tid)] = static_cast<Acc>(gradients[i]);
        hess_[static_cast<std::size_t>(tid)] = static_cast<Acc>(hessians[i]);
      }
      for (int l = 0; l < features_; ++l) {
        for (int line = 0; line < 2; ++line) {
          run_cycle(l, line, active);
        }
      }
    }
    if (cfg_.fast_path && rows > 0) flush_registers();
    return export_result();
  }

 private:
  int target_feature(int l, int tid) const {
    if (schedule_ == Schedule::naive) return l;
    return (l + (tid & 3)) & (features_ - 1);
  }
  bool is_gradient_line(int line, int tid) const {
    if (schedule_ == Schedule::naive) return line == 0;
    return (line ^ ((tid >> 2) & 1)) == 0;
  }
  std::size_t stat_index(int p, int stat, int bank, int bin) const {
    return ((static_cast<std::size_t>(p) * 2 + static_cast<std::size_t>(stat)) * banks_ +
            static_cast<std::size_t>(bank)) *
               k_ +
           static_cast<std::size_t>(bin);
  }

  void issue(int p, bool is_grad, int bank, int bin, Acc value, std::int64_t count) {
    if (bin >= k_) throw std::invalid_argument("bin value exceeds configured bin_count");
    std::size_t id = stat_index(p, is_grad ? 0 : 1, bank, bin);
    stats_[id] += value;
    if (is_grad) {
      counts_[(static_cast<std::size_t>(p) * banks_ + static_cast<std::size_t>(bank)) * k_ +
              static_cast<std::size_t>(bin)] += count;
      ++report_.gradient_updates;
    } else {
      ++report_.hessian_updates;
    }
    ++report_.total_atomic_updates;
    tally_.hit(id);
  }

  void run_cycle(int l, int line, int active) {
    tally_.begin_cycle();
    for (int tid = 0; tid < active; ++tid) {
      int p = target_feature(l, tid);
      bool is_grad = is_gradient_line(line, tid);
      int bank = tid & (banks_ - 1);
      int bin = static_cast<int>((word_[static_cast<std::size_t>(tid)] >> (bits_ * p)) &
                                 bin_mask_);
      Acc g = grad_[static_cast<std::size_t>(tid)];
      Acc h = hess_[static_cast<std::size_t>(tid)];
      if (!cfg_.fast_path) {
        issue(p, is_grad, bank, bin, is_grad ? g : h, 1);
        continue;
      }
      MruRegister<Acc>& reg =
          regs_[static_cast<std::size_t>(tid) * features_ + static_cast<std::size_t>(p)];
      if (reg.bin == bin) {
        if (is_grad) {
          reg.grad += g;
          reg.count += 1;
        } else {
          reg.hess += h;
        }
      } else {
        if (reg.bin >= 0) {
          issue(p, is_grad, bank, reg.bin, is_grad ? reg.grad : reg.hess, reg.count);
        }
        if (line == 1) reg = MruRegister<Acc>{bin, g, h, 1};
      }
    }
    finish_cycle();
  }

  void flush_registers() {
    for (int l = 0; l < features_; ++l) {
      for (int line = 0; line < 2; ++line) {
        tally_.begin_cycle();
        for (int tid = 0; tid < m_; ++tid) {
          int p = target_feature(l, tid);
          MruRegister<Acc>& reg =
              regs_[static_cast<std::size_t>(tid) * features_ + static_cast<std::size_t>(p)];
          if (reg.bin < 0) continue;
          bool is_grad = is_gradient_line(line, tid);
          issue(p, is_grad, tid & (banks_ - 1), reg.bin, is_grad ? reg.grad : reg.hess,
                reg.count);
          if (line == 1) reg.bin = -1;
        }
        finish_cycle();
      }
    }
  }

  void finish_cycle() {
    report_.total_serialization_steps += tally_.max_mult();
    ++report_.lockstep_cycles;
  }

  LockstepResult export_result() {
    LockstepResult out;
    out.entries.resize(static_cast<std::size_t>(features_));
    for (int p = 0; p < features_; ++p) {
      HistogramEntry& entry = out.entries[static_cast<std::size_t>(p)];
      entry.feature_id = tuples_.feature_ids[static_cast<std::size_t>(p)];
      entry.precision = cfg_.precision;
      entry.bins.resize(static_cast<std::size_t>(k_));
      for (int bin = 0; bin < k_; ++bin) {
        Acc g(0), h(0);
        std::int64_t c = 0;
        for (int bank = 0; bank < banks_; ++bank) {
          g += stats_[stat_index(p, 0, bank, bin)];
          h += stats_[stat_index(p, 1, bank, bin)];
          c += counts_[(static_cast<std::size_t>(p) * banks_ + static_cast<std::size_t>(bank)) *
                           k_ +
                       static_cast<std::size_t>(bin)];
        }
        entry.bins[static_cast<std::size_t>(bin)] = {static_cast<double>(g),
                                                     static_cast<double>(h), c};
      }
    }
    report_.ideal_steps =
        (report_.total_atomic_updates + static_cast<std::uint64_t>(m_) - 1) /
        static_cast<std::uint64_t>(m_);
    out.report = report_;
    return out;
  }

  const FeatureTupleArray& tuples_;
  const WorkgroupConfig& cfg_;
  Schedule schedule_;
  int features_;
  int bits_;
  std::uint32_t bin_mask_;
  int k_;
  int m_;
  int banks_;
  std::vector<Acc> stats_;
  std::vector<std::int64_t> counts_;
  CycleTally tally_;
  std::vector<MruRegister<Acc>> regs_;
  std::vector<std::uint32_t> word_;
  std::vector<Acc> grad_;
  std::vector<Acc> hess_;
  ConflictReport report_;
};

}  // namespace

LockstepResult simulate_workgroup(const FeatureTupleArray& tuples,
                                  std::span<const row_index_t> indices,
                                  std::span<const double> gradients,
                                  std::span<const double> hessians,
                                  const WorkgroupConfig& config, Schedule schedule) {
  config.validate();
  if (tuples.features_per_word != 4 && tuples.features_per_word != 8) {
    throw std::invalid_argument("feature tuples must hold 4 or 8 features");
  }
  if (config.precision == PrecisionMode::bits32) {
    WorkgroupSim<float> sim(tuples, config, schedule);
    return sim.run(indices, gradients, hessians);
  }
  WorkgroupSim<double> sim(tuples, config, schedule);
  return sim.run(indices, gradients, hessians);
}

LockstepResult build_histograms_lockstep(const FeatureTupleArray& tuples, const LeafState& leaf,
                                         const WorkgroupConfig& config) {
  return simulate_workgroup(tuples, leaf.indices, leaf.gradients, leaf.hessians, config,
                            Schedule::rotated);
}

LockstepResult build_histograms_naive_lockstep(const FeatureTupleArray& tuples,
                                               const LeafState& leaf,
                                               const WorkgroupConfig& config) {
  return simulate_workgroup(tuples, leaf.indices, leaf.gradients, leaf.hessians, config,
                            Schedule::naive);
}

DenseLockstepResult build_dense_histograms_lockstep(const PackedFeatures& packed,
                                                    const LeafState& leaf,
                                                    const WorkgroupConfig& config,
                                                    Schedule schedule,
                                                    std::size_t rows_per_group) {
  DenseLockstepResult out;
  std::size_t rows = leaf.indices.size();
  std::size_t groups = 1;
  if (rows_per_group > 0 && rows > 0) {
    groups = (rows + rows_per_group - 1) / rows_per_group;
  }

  std::vector<LockstepResult> per_tuple(packed.tuples.size());
  parallel_for(packed.tuples.size(), [&](std::size_t t) {
    if (groups == 1) {
      per_tuple[t] = simulate_workgroup(packed.tuples[t], leaf.indices, leaf.gradients,
                                        leaf.hessians, config, schedule);
      return;
    }
    std::vector<LockstepResult> group_results(groups);
    for (std::size_t gi = 0; gi < groups; ++gi) {
      std::size_t begin = gi * rows_per_group;
      std::size_t end = std::min(rows, begin + rows_per_group);
      group_results[gi] = simulate_workgroup(
          packed.tuples[t], std::span(leaf.indices).subspan(begin, end - begin),
          std::span(leaf.gradients).subspan(begin, end - begin),
          std::span(leaf.hessians).subspan(begin, end - begin), config, schedule);
    }
    LockstepResult merged;
    merged.entries.resize(group_results[0].entries.size());
    for (std::size_t p = 0; p < merged.entries.size(); ++p) {
      std::vector<HistogramEntry> parts;
      parts.reserve(groups);
      for (auto& gr : group_results) parts.push_back(std::move(gr.entries[p]));
      merged.entries[p] = reduce_private_histograms(parts);
    }
    for (const auto& gr : group_results) merged.report.merge(gr.report);
    per_tuple[t] = std::move(merged);
  });

  std::size_t dense_count = packed.redistribution.size();
  out.entries.resize(dense_count);
  for (std::size_t t = 0; t < per_tuple.size(); ++t) {
    int per_word = packed.tuples[t].features_per_word;
    for (int p = 0; p < per_word; ++p) {
      std::size_t pos = t * static_cast<std::size_t>(per_word) + static_cast<std::size_t>(p);
      if (pos >= dense_count) break;  // padding slot
      out.entries[pos] =
          fold_histogram(per_tuple[t].entries[static_cast<std::size_t>(p)],
                         packed.redistribution[pos]);
    }
    out.report.merge(per_tuple[t].report);
  }
  return out;
}

}  // namespace histoboost
