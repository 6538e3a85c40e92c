#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "slicer/compensated_sum.hpp"
#include "slicer/counter_rng.hpp"
#include "slicer/parallel.hpp"
#include "slicer/slicer_core.hpp"

namespace slicer {

/// N particles drawn uniformly on cell 0 and followed for `steps` steps.
struct EnsembleConfig {
  double alpha = 0.5;
  std::uint64_t particles = 1000;
  std::uint64_t steps = 100;
  std::uint64_t seed = 0;
  /// Times at which histograms are taken; empty means {steps}.
  std::vector<std::uint64_t> sample_times;
  /// Start every particle at 1 - x instead of x.
  bool mirror_initial = false;
  /// 0 = hardware concurrency. Never affects results.
  unsigned threads = 0;
  Budget budget;
};

/// Cell counts of the ensemble at one time.
struct EmpiricalHistogram {
  std::uint64_t time = 0;
  std::map<CellIndex, std::uint64_t> counts;

  [[nodiscard]] std::uint64_t total() const noexcept {
    std::uint64_t n = 0;
    for (const auto& [cell, c] : counts) n += c;
    return n;
  }

  [[nodiscard]] double frequency(CellIndex j) const {
    const auto it = counts.find(j);
    return it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total());
  }

  friend bool operator==(const EmpiricalHistogram&, const EmpiricalHistogram&) = default;
};

struct MomentEstimate {
  std::uint64_t time;
  double value;
  /// Sample standard deviation of j^p divided by sqrt(N).
  double std_error;
};

/// Initial internal coordinate of particle `index`, a pure function of
/// (seed, index).
[[nodiscard]] inline double initial_point(std::uint64_t seed, std::uint64_t index) noexcept {
  const Philox4x32 gen(seed);
  const auto block = gen({static_cast<std::uint32_t>(StreamDomain::SlicerInitialPoint),
                          static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0u});
  return unit_closed_open(low_bits64(block));
}

namespace detail {

inline std::vector<std::uint64_t> resolved_sample_times(const EnsembleConfig& cfg) {
  if (cfg.particles == 0) throw std::invalid_argument("ensemble needs at least one particle");
  if (cfg.sample_times.empty()) return {cfg.steps};
  if (!std::is_sorted(cfg.sample_times.begin(), cfg.sample_times.end())) {
    throw std::invalid_argument("sample times must be sorted");
  }
  if (cfg.sample_times.back() > cfg.steps) throw std::invalid_argument("sample times must not exceed steps");
  return cfg.sample_times;
}

/// Writes the cell of a particle with coordinate x at each sample time.
///
/// Walks the turning rule one step at a time. As soon as the cell equals
/// the one two steps earlier, the orbit (x fixed, map deterministic) is
/// 2-periodic and the remaining sample times are filled in directly. A
/// budget, if given, is polled every 2^20 steps.
inline void trace_particle(double x, std::span<const double> slicers, std::span<const std::uint64_t> times,
                           std::span<CellIndex> cells_out, const Budget* budget = nullptr) {
  CellIndex cell = 0;
  CellIndex prev = 0;   // cell at t - 1
  CellIndex prev2 = 0;  // cell at t - 2
  std::uint64_t t = 0;
  std::size_t k = 0;
  for (; k < times.size(); ++k) {
    while (t < times[k]) {
      if (t >= 2 && cell == prev2) break;
      const auto a = static_cast<std::size_t>(cell < 0 ? -cell : cell);
      prev2 = prev;
      prev = cell;
      cell += static_cast<CellIndex>(route(x, slicers[a]));
      ++t;
      if (budget && (t & 0xfffffu) == 0) budget->check();
    }
    if (t < times[k]) break;  // periodic from here on
    cells_out[k] = cell;
  }
  for (; k < times.size(); ++k) cells_out[k] = (times[k] - t) % 2 == 0 ? cell : prev;
}

}  // namespace detail

/// Histograms of the ensemble at every sample time.
///
/// Particles are processed in fixed chunks and merged by integer addition,
/// so the output is identical for any thread count.
[[nodiscard]] inline std::vector<EmpiricalHistogram> run_ensemble(const EnsembleConfig& cfg) {
  const auto times = detail::resolved_sample_times(cfg);
  const SlicerFamily family(cfg.alpha);
  const auto slicers = slicer_table(family, static_cast<CellIndex>(cfg.steps) + 1);

  std::vector<EmpiricalHistogram> result(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) result[k].time = times[k];
  std::mutex merge_mutex;

  constexpr std::uint64_t kChunk = 4096;
  const std::uint64_t chunks = (cfg.particles + kChunk - 1) / kChunk;
  parallel_for(chunks, cfg.threads, [&](std::size_t chunk) {
    cfg.budget.check();
    const std::uint64_t begin = chunk * kChunk;
    const std::uint64_t end = std::min(cfg.particles, begin + kChunk);
    std::vector<std::unordered_map<CellIndex, std::uint64_t>> local(times.size());
    std::vector<CellIndex> cells(times.size());
    for (std::uint64_t i = begin; i < end; ++i) {
      double x = initial_point(cfg.seed, i);
      if (cfg.mirror_initial) x = 1.0 - x;
      detail::trace_particle(x, slicers, times, cells, &cfg.budget);
      for (std::size_t k = 0; k < times.size(); ++k) ++local[k][cells[k]];
    }
    std::lock_guard lock(merge_mutex);
    for (std::size_t k = 0; k < times.size(); ++k) {
      for (const auto& [cell, c] : local[k]) result[k].counts[cell] += c;
    }
  });
  return result;
}

/// p-th moment of the signed displacement from one histogram, with its
/// standard error. Addends are taken in increasing cell order.
[[nodiscard]] inline MomentEstimate histogram_moment(const EmpiricalHistogram& h, unsigned p) {
  CompensatedSum<double> sum;
  CompensatedSum<double> sum_sq;
  for (const auto& [cell, c] : h.counts) {
    const double jp = std::pow(static_cast<double>(cell), static_cast<double>(p));
    sum.add(static_cast<double>(c) * jp);
    sum_sq.add(static_cast<double>(c) * jp * jp);
  }
  const double n = static_cast<double>(h.total());
  const double mean = sum.value() / n;
  double err = 0.0;
  if (n > 1.0) {
    const double var = std::max(0.0, (sum_sq.value() - n * mean * mean) / (n - 1.0));
    err = std::sqrt(var / n);
  }
  return {h.time, mean, err};
}

[[nodiscard]] inline std::vector<std::pair<std::uint64_t, double>> msd_series(
    std::span<const EmpiricalHistogram> histograms) {
  std::vector<std::pair<std::uint64_t, double>> out;
  out.reserve(histograms.size());
  for (const auto& h : histograms) out.emplace_back(h.time, histogram_moment(h, 2).value);
  return out;
}

[[nodiscard]] inline std::vector<std::pair<std::uint64_t, double>> msd_series(const EnsembleConfig& cfg) {
  const auto histograms = run_ensemble(cfg);
  return msd_series(histograms);
}

[[nodiscard]] inline std::vector<MomentEstimate> empirical_moment(std::span<const EmpiricalHistogram> histograms,
                                                                  unsigned p) {
  if (p == 0) throw std::invalid_argument("moment order must be >= 1");
  std::vector<MomentEstimate> out;
  out.reserve(histograms.size());
  for (const auto& h : histograms) out.push_back(histogram_moment(h, p));
  return out;
}

[[nodiscard]] inline std::vector<MomentEstimate> empirical_moment(const EnsembleConfig& cfg, unsigned p) {
  if (p == 0) throw std::invalid_argument("moment order must be >= 1");
  const auto histograms = run_ensemble(cfg);
  return empirical_moment(histograms, p);
}

}  // namespace slicer
