#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "slicer/compensated_sum.hpp"
#include "slicer/counter_rng.hpp"
#include "slicer/parallel.hpp"
#include "slicer/sampling.hpp"

namespace slicer {

/// Inverse-CDF draw from lambda(r) = beta r0^beta r^-(beta+1) on [r0, inf).
[[nodiscard]] inline double sample_gap(double beta, double r0, double u) {
  if (!(beta > 0.0)) throw std::domain_error("gap exponent beta must be positive");
  if (!(r0 > 0.0)) throw std::domain_error("gap cutoff r0 must be positive");
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("gap draw needs u in (0, 1)");
  return r0 * std::pow(u, -1.0 / beta);
}

/// Any line of scatterers indexed by the integers. Index 0 is the first
/// scatterer right of the origin, index -1 the first one left of it.
template <typename Env>
concept ScattererLine = requires(Env& env, std::int64_t i) {
  { env.position(i) } -> std::convertible_to<double>;
};

/// Frozen Pareto-gap scatterers on the full line.
///
/// Gap k on each side is a pure function of (seed, env index, side, k), so
/// the environment is identical whatever order it is extended in. Positions
/// are materialised lazily outward from the origin.
class QuenchedEnvironment {
 public:
  QuenchedEnvironment(double beta, double r0, std::uint64_t seed, std::uint32_t env_index)
      : beta_(beta), r0_(r0), gen_(seed), env_index_(env_index) {
    if (!(beta > 0.0)) throw std::domain_error("gap exponent beta must be positive");
    if (!(r0 > 0.0)) throw std::domain_error("gap cutoff r0 must be positive");
  }

  [[nodiscard]] double beta() const noexcept { return beta_; }
  [[nodiscard]] double r0() const noexcept { return r0_; }

  /// k-th gap on one side (side 0 = right, 1 = left), counted from the origin.
  [[nodiscard]] double gap(std::uint32_t side, std::uint32_t k) const {
    const auto block = gen_({static_cast<std::uint32_t>(StreamDomain::ScattererGap), env_index_, side, k});
    return sample_gap(beta_, r0_, unit_open(low_bits64(block)));
  }

  [[nodiscard]] double position(std::int64_t i) {
    if (i >= 0) return extend(right_, 0, static_cast<std::size_t>(i));
    return -extend(left_, 1, static_cast<std::size_t>(-(i + 1)));
  }

  [[nodiscard]] std::size_t materialised() const noexcept { return right_.size() + left_.size(); }

 private:
  double extend(std::vector<double>& side, std::uint32_t which, std::size_t k) {
    while (side.size() <= k) {
      const double prev = side.empty() ? 0.0 : side.back();
      side.push_back(prev + gap(which, static_cast<std::uint32_t>(side.size())));
    }
    return side[k];
  }

  double beta_;
  double r0_;
  Philox4x32 gen_;
  std::uint32_t env_index_;
  std::vector<double> right_;
  std::vector<double> left_;
};

/// Equally spaced scatterers at (i + 1/2) * spacing.
struct RegularLine {
  double spacing = 1.0;
  [[nodiscard]] double position(std::int64_t i) const noexcept {
    return (static_cast<double>(i) + 0.5) * spacing;
  }
};

/// Transmit/reflect decisions for one walker: event e is bit e of the
/// Philox stream keyed by (seed, env, walker). Event 0 picks the initial
/// direction (set = right).
class WalkerCoins {
 public:
  WalkerCoins(std::uint64_t seed, std::uint32_t env_index, std::uint32_t walker)
      : gen_(seed), env_(env_index), walker_(walker) {}

  [[nodiscard]] bool operator()(std::uint64_t event) {
    const std::uint64_t block = event >> 7;
    if (block != cached_block_) {
      const auto out = gen_({static_cast<std::uint32_t>(StreamDomain::WalkerCoin), env_, walker_,
                             static_cast<std::uint32_t>(block)});
      bits_[0] = low_bits64(out);
      bits_[1] = high_bits64(out);
      cached_block_ = block;
    }
    const auto bit = static_cast<unsigned>(event & 127u);
    return ((bits_[bit >> 6] >> (bit & 63u)) & 1u) != 0;
  }

 private:
  Philox4x32 gen_;
  std::uint32_t env_;
  std::uint32_t walker_;
  std::uint64_t cached_block_ = ~std::uint64_t{0};
  std::uint64_t bits_[2]{};
};

/// Coin stream returning the same answer for every event.
struct ConstantCoins {
  bool transmit = true;
  [[nodiscard]] bool operator()(std::uint64_t) const noexcept { return transmit; }
};

struct WalkConfig {
  double velocity = 1.0;
  double t_max = 1e5;
  /// Sorted times in (0, t_max]; empty means 20 per decade from 1 to t_max.
  std::vector<double> sample_times;
  std::uint32_t environments = 200;
  std::uint32_t walkers_per_environment = 50;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  Budget budget;
};

namespace detail {

inline std::vector<double> resolved_sample_times(const WalkConfig& cfg) {
  if (!(cfg.velocity > 0.0)) throw std::invalid_argument("walk velocity must be positive");
  if (!(cfg.t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
  if (cfg.environments == 0 || cfg.walkers_per_environment == 0) {
    throw std::invalid_argument("need at least one environment and one walker");
  }
  if (cfg.sample_times.empty()) {
    const double lo = std::min(1.0, cfg.t_max);
    const auto count = static_cast<std::size_t>(std::ceil(20.0 * std::log10(cfg.t_max / lo))) + 1;
    return geometric_grid(lo, cfg.t_max, count);
  }
  if (!std::is_sorted(cfg.sample_times.begin(), cfg.sample_times.end()) || !(cfg.sample_times.front() > 0.0) ||
      cfg.sample_times.back() > cfg.t_max) {
    throw std::invalid_argument("sample times must be sorted and lie in (0, t_max]");
  }
  return cfg.sample_times;
}

}  // namespace detail

/// Position and number of distinct scatterers hit at one sample time.
struct WalkSample {
  double time;
  double position;
  std::uint64_t visited;
};

/// Event-driven walk from the origin: fly at speed v to the next scatterer,
/// then transmit or reflect by the coin stream. Sample positions are
/// interpolated exactly within flights.
///
/// Scatterer hits form a contiguous index range, so the visited count is
/// max - min + 1. A sample falling exactly on a hit is taken before the hit.
/// A budget, if given, is polled every 2^16 hits.
template <ScattererLine Env, typename Coins>
void trace_walk(Env& env, Coins& coins, double velocity, std::span<const double> times,
                std::span<WalkSample> out, const Budget* budget = nullptr) {
  std::uint64_t event = 0;
  int dir = coins(event++) ? +1 : -1;
  std::int64_t target = dir > 0 ? 0 : -1;
  double r = 0.0;
  double t = 0.0;
  std::int64_t lo_hit = 0;
  std::int64_t hi_hit = -1;
  std::size_t k = 0;
  while (k < times.size()) {
    const double next = env.position(target);
    const double t_hit = t + std::abs(next - r) / velocity;
    const auto visited = static_cast<std::uint64_t>(hi_hit - lo_hit + 1);
    while (k < times.size() && times[k] <= t_hit) {
      out[k] = {times[k], r + dir * velocity * (times[k] - t), visited};
      ++k;
    }
    if (hi_hit < lo_hit) {
      lo_hit = hi_hit = target;
    } else {
      lo_hit = std::min(lo_hit, target);
      hi_hit = std::max(hi_hit, target);
    }
    r = next;
    t = t_hit;
    if (budget && (event & 0xffffu) == 0) budget->check();
    if (!coins(event++)) dir = -dir;
    target += dir;
  }
}

/// One walker of environment `env`, sampled at the configured times.
[[nodiscard]] inline std::vector<WalkSample> simulate_walk(QuenchedEnvironment& env, const WalkConfig& cfg,
                                                           std::uint32_t env_index, std::uint32_t walker) {
  const auto times = detail::resolved_sample_times(cfg);
  WalkerCoins coins(cfg.seed, env_index, walker);
  std::vector<WalkSample> out(times.size());
  trace_walk(env, coins, cfg.velocity, times, out, &cfg.budget);
  return out;
}

/// Averages over environments x walkers of |r|^p and of the visited count.
struct LevyEnsembleResult {
  std::vector<double> times;
  std::vector<double> orders;
  /// moments[q][k] = <|r|^orders[q]> at times[k].
  std::vector<std::vector<double>> moments;
  std::vector<double> mean_visited;
};

/// Runs the quenched ensemble once and evaluates every requested order.
///
/// Each environment is simulated by one worker and its sums stored in its
/// own slot; slots are reduced in environment order with compensated sums,
/// so the result does not depend on the thread count.
[[nodiscard]] inline LevyEnsembleResult run_levy_ensemble(const WalkConfig& cfg, double beta, double r0,
                                                          std::vector<double> orders) {
  const auto times = detail::resolved_sample_times(cfg);
  for (double p : orders) {
    if (!(p > 0.0)) throw std::invalid_argument("moment order must be positive");
  }
  if (!(beta > 0.0) || !(r0 > 0.0)) throw std::invalid_argument("beta and r0 must be positive");
  const std::size_t nt = times.size();
  const std::size_t nq = orders.size();

  struct EnvSums {
    std::vector<double> moment;  // nq * nt
    std::vector<std::uint64_t> visited;
  };
  std::vector<EnvSums> per_env(cfg.environments);

  parallel_for(cfg.environments, cfg.threads, [&](std::size_t e) {
    const auto env_index = static_cast<std::uint32_t>(e);
    QuenchedEnvironment env(beta, r0, cfg.seed, env_index);
    EnvSums sums{std::vector<double>(nq * nt, 0.0), std::vector<std::uint64_t>(nt, 0)};
    std::vector<WalkSample> samples(nt);
    for (std::uint32_t w = 0; w < cfg.walkers_per_environment; ++w) {
      cfg.budget.check();
      WalkerCoins coins(cfg.seed, env_index, w);
      trace_walk(env, coins, cfg.velocity, times, samples, &cfg.budget);
      for (std::size_t k = 0; k < nt; ++k) {
        const double a = std::abs(samples[k].position);
        for (std::size_t q = 0; q < nq; ++q) {
          sums.moment[q * nt + k] += orders[q] == 2.0 ? a * a : std::pow(a, orders[q]);
        }
        sums.visited[k] += samples[k].visited;
      }
    }
    per_env[e] = std::move(sums);
  });

  const double total = static_cast<double>(cfg.environments) * static_cast<double>(cfg.walkers_per_environment);
  LevyEnsembleResult result{times, orders, std::vector<std::vector<double>>(nq, std::vector<double>(nt)),
                            std::vector<double>(nt)};
  for (std::size_t k = 0; k < nt; ++k) {
    for (std::size_t q = 0; q < nq; ++q) {
      CompensatedSum<double> acc;
      for (const auto& s : per_env) acc.add(s.moment[q * nt + k]);
      result.moments[q][k] = acc.value() / total;
    }
    std::uint64_t visited = 0;
    for (const auto& s : per_env) visited += s.visited[k];
    result.mean_visited[k] = static_cast<double>(visited) / total;
  }
  return result;
}

[[nodiscard]] inline std::vector<std::pair<double, double>> ensemble_moments(const WalkConfig& cfg, double beta,
                                                                             double r0, double p) {
  const auto res = run_levy_ensemble(cfg, beta, r0, {p});
  std::vector<std::pair<double, double>> out;
  for (std::size_t k = 0; k < res.times.size(); ++k) out.emplace_back(res.times[k], res.moments[0][k]);
  return out;
}

[[nodiscard]] inline std::vector<std::pair<double, double>> visited_sites(const WalkConfig& cfg, double beta,
                                                                          double r0) {
  const auto res = run_levy_ensemble(cfg, beta, r0, {});
  std::vector<std::pair<double, double>> out;
  for (std::size_t k = 0; k < res.times.size(); ++k) out.emplace_back(res.times[k], res.mean_visited[k]);
  return out;
}

/// Map parameter whose slicer MSD exponent 2 - alpha matches the walk's.
[[nodiscard]] inline double alpha_from_beta(double beta) {
  if (!(beta > 0.0)) throw std::domain_error("beta must be positive");
  if (beta <= 1.0) return beta * beta / (1.0 + beta);
  if (beta <= 1.5) return beta - 0.5;
  return 1.0;
}

/// Growth exponent of the number of visited scatterers.
[[nodiscard]] inline double predicted_visited_exponent(double beta) {
  if (!(beta > 0.0)) throw std::domain_error("beta must be positive");
  return beta < 1.0 ? beta / (1.0 + beta) : 0.5;
}

/// MSD growth exponent of the quenched walk.
[[nodiscard]] inline double predicted_msd_exponent(double beta) {
  if (!(beta > 0.0)) throw std::domain_error("beta must be positive");
  if (beta < 1.0) return (2.0 + 2.0 * beta - beta * beta) / (1.0 + beta);
  if (beta <= 1.5) return 2.5 - beta;
  return 1.0;
}

/// Growth exponent of <|r|^p>. Empty on the marginal lines beta = 1,
/// p = beta (beta < 1) and p = 2 beta - 1 (beta > 1), where no branch applies.
[[nodiscard]] inline std::optional<double> predicted_moment_exponent(double beta, double p) {
  if (!(beta > 0.0)) throw std::domain_error("beta must be positive");
  if (!(p > 0.0)) throw std::domain_error("moment order must be positive");
  if (beta < 1.0) {
    if (p < beta) return p / (1.0 + beta);
    if (p > beta) return (p * (1.0 + beta) - beta * beta) / (1.0 + beta);
    return std::nullopt;
  }
  if (beta > 1.0) {
    const double knee = 2.0 * beta - 1.0;
    if (p < knee) return p / 2.0;
    if (p > knee) return 0.5 + p - beta;
    return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace slicer
