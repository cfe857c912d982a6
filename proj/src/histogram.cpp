#include "histoboost/histogram.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "histoboost/parallel.hpp"

namespace histoboost {

bool stats_close(double a, double b, double tolerance) {
  double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
  return std::fabs(a - b) <= tolerance * scale;
}

bool histograms_equivalent(const HistogramEntry& a, const HistogramEntry& b, double tolerance) {
  if (a.bins.size() != b.bins.size()) return false;
  for (std::size_t i = 0; i < a.bins.size(); ++i) {
    if (a.bins[i].count != b.bins[i].count) return false;
    if (!stats_close(a.bins[i].grad_sum, b.bins[i].grad_sum, tolerance)) return false;
    if (!stats_close(a.bins[i].hess_sum, b.bins[i].hess_sum, tolerance)) return false;
  }
  return true;
}

void WorkgroupConfig::validate() const {
  if (workgroup_size < 1 || !std::has_single_bit(static_cast<unsigned>(workgroup_size))) {
    throw std::invalid_argument("workgroup_size must be a power of two");
  }
  if (bin_count < 2 || bin_count > 256) {
    throw std::invalid_argument("bin_count out of range");
  }
  if (banks < 1 || !std::has_single_bit(static_cast<unsigned>(banks))) {
    throw std::invalid_argument("banks must be a power of two");
  }
  if (local_mem_footprint() > local_mem_capacity) {
    throw std::invalid_argument("histogram footprint exceeds local memory capacity");
  }
}

int estimate_occupancy(int bin_count, int banks, std::size_t local_mem_capacity) {
  std::size_t footprint = static_cast<std::size_t>(4) * 3 * 4 *
                          static_cast<std::size_t>(bin_count) * static_cast<std::size_t>(banks);
  return static_cast<int>(local_mem_capacity / footprint);
}

ThreadRole thread_role(int tid, int workgroup_size) {
  if (tid < 0 || tid >= workgroup_size) throw std::invalid_argument("tid out of range");
  return ThreadRole{tid & 3, (tid >> 2) & 1};
}

void ConflictReport::merge(const ConflictReport& other) {
  total_atomic_updates += other.total_atomic_updates;
  gradient_updates += other.gradient_updates;
  hessian_updates += other.hessian_updates;
  total_serialization_steps += other.total_serialization_steps;
  ideal_steps += other.ideal_steps;
  lockstep_cycles += other.lockstep_cycles;
}

std::string ConflictReport::to_text() const {
  std::string out;
  auto line = [&out](const char* key, std::uint64_t v) {
    out += key;
    out += ' ';
    out += std::to_string(v);
    out += '\n';
  };
  line("total_atomic_updates", total_atomic_updates);
  line("gradient_updates", gradient_updates);
  line("hessian_updates", hessian_updates);
  line("total_serialization_steps", total_serialization_steps);
  line("ideal_steps", ideal_steps);
  line("lockstep_cycles", lockstep_cycles);
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, conflict_ratio());
  out += "conflict_ratio ";
  out.append(buf, res.ptr);
  out += '\n';
  return out;
}

namespace {

template <typename Acc>
HistogramEntry reference_impl(const BinnedColumn& column, std::span<const row_index_t> indices,
                              std::span<const double> gradients,
                              std::span<const double> hessians, PrecisionMode precision) {
  HistogramEntry entry;
  entry.precision = precision;
  entry.bins.resize(static_cast<std::size_t>(column.bin_capacity));
  std::vector<Acc> grad(entry.bins.size(), Acc(0));
  std::vector<Acc> hess(entry.bins.size(), Acc(0));
  for (std::size_t i = 0; i < indices.size(); ++i) {
    std::uint8_t b = column.bins[static_cast<std::size_t>(indices[i])];
    grad[b] += static_cast<Acc>(gradients[i]);
    hess[b] += static_cast<Acc>(hessians[i]);
    entry.bins[b].count += 1;
  }
  for (std::size_t b = 0; b < entry.bins.size(); ++b) {
    entry.bins[b].grad_sum = static_cast<double>(grad[b]);
    entry.bins[b].hess_sum = static_cast<double>(hess[b]);
  }
  return entry;
}

template <typename Acc>
HistogramEntry reduce_impl(const std::vector<HistogramEntry>& parts) {
  HistogramEntry out;
  out.feature_id = parts[0].feature_id;
  out.precision = parts[0].precision;
  out.bins.resize(parts[0].bins.size());
  for (std::size_t b = 0; b < out.bins.size(); ++b) {
    Acc g(0), h(0);
    std::int64_t c = 0;
    for (const auto& part : parts) {
      g += static_cast<Acc>(part.bins[b].grad_sum);
      h += static_cast<Acc>(part.bins[b].hess_sum);
      c += part.bins[b].count;
    }
    out.bins[b].grad_sum = static_cast<double>(g);
    out.bins[b].hess_sum = static_cast<double>(h);
    out.bins[b].count = c;
  }
  return out;
}

}  // namespace

HistogramEntry build_histogram_reference(const BinnedColumn& column, const LeafState& leaf,
                                         PrecisionMode precision) {
  return build_histogram_reference(column, leaf.indices, leaf.gradients, leaf.hessians,
                                   precision);
}

HistogramEntry build_histogram_reference(const BinnedColumn& column,
                                         std::span<const row_index_t> indices,
                                         std::span<const double> gradients,
                                         std::span<const double> hessians,
                                         PrecisionMode precision) {
  return precision == PrecisionMode::bits32
             ? reference_impl<float>(column, indices, gradients, hessians, precision)
             : reference_impl<double>(column, indices, gradients, hessians, precision);
}

HistogramEntry reduce_private_histograms(const std::vector<HistogramEntry>& parts) {
  if (parts.empty()) throw std::invalid_argument("no histogram parts to reduce");
  for (const auto& part : parts) {
    if (part.bins.size() != parts[0].bins.size() || part.feature_id != parts[0].feature_id ||
        part.precision != parts[0].precision) {
      throw std::invalid_argument("histogram parts disagree on shape");
    }
  }
  return parts[0].precision == PrecisionMode::bits32 ? reduce_impl<float>(parts)
                                                     : reduce_impl<double>(parts);
}

HistogramSet build_histograms_partitioned(const BinnedDataset& data, const LeafState& leaf,
                                          PrecisionMode precision, int max_workers) {
  constexpr std::size_t kChunk = 65536;
  std::size_t rows = leaf.indices.size();
  std::size_t chunks = rows == 0 ? 1 : (rows + kChunk - 1) / kChunk;

  HistogramSet out(static_cast<std::size_t>(data.num_features()));

  // Sparse feature lookup: feature id -> slot in sparse_storage.
  std::vector<int> sparse_slot(static_cast<std::size_t>(data.num_features()), -1);
  for (std::size_t s = 0; s < data.sparse_features.size(); ++s) {
    sparse_slot[static_cast<std::size_t>(data.sparse_features[s])] = static_cast<int>(s);
  }

  struct Task {
    int feature;
    std::size_t chunk;
  };
  std::vector<Task> tasks;
  std::vector<std::vector<HistogramEntry>> parts(out.size());
  for (int f = 0; f < data.num_features(); ++f) {
    if (sparse_slot[static_cast<std::size_t>(f)] >= 0) {
      tasks.push_back({f, 0});
    } else {
      parts[static_cast<std::size_t>(f)].resize(chunks);
      for (std::size_t c = 0; c < chunks; ++c) tasks.push_back({f, c});
    }
  }

  parallel_for(
      tasks.size(),
      [&](std::size_t t) {
        auto [f, c] = tasks[t];
        int slot = sparse_slot[static_cast<std::size_t>(f)];
        if (slot >= 0) {
          out[static_cast<std::size_t>(f)] = build_sparse_histogram(
              data.sparse_storage[static_cast<std::size_t>(slot)], leaf, precision);
          out[static_cast<std::size_t>(f)].feature_id = f;
          return;
        }
        std::size_t begin = c * kChunk;
        std::size_t len = std::min(rows, begin + kChunk) - begin;
        parts[static_cast<std::size_t>(f)][c] = build_histogram_reference(
            data.columns[static_cast<std::size_t>(f)], std::span(leaf.indices).subspan(begin, len),
            std::span(leaf.gradients).subspan(begin, len),
            std::span(leaf.hessians).subspan(begin, len), precision);
        parts[static_cast<std::size_t>(f)][c].feature_id = f;
      },
      max_workers);

  for (int f = 0; f < data.num_features(); ++f) {
    auto& p = parts[static_cast<std::size_t>(f)];
    if (p.empty()) continue;  // sparse, already written
    out[static_cast<std::size_t>(f)] = p.size() == 1 ? p[0] : reduce_private_histograms(p);
  }
  return out;
}

}  // namespace histoboost
