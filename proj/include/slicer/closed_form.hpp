#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "slicer/compensated_sum.hpp"
#include "slicer/io.hpp"
#include "slicer/slicer_core.hpp"

namespace slicer {

namespace detail {

inline void require_alpha_in_range(double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw std::domain_error("alpha must lie in (0, 2], got " + std::to_string(alpha));
  }
}

}  // namespace detail

/// Mass of the extreme cells +-n after n steps: l_{n-1}.
[[nodiscard]] inline double traveling_area(double alpha, std::uint64_t n) {
  detail::require_alpha_in_range(alpha);
  if (n == 0) throw std::domain_error("traveling area is defined for n >= 1");
  return SlicerFamily(alpha).position(static_cast<CellIndex>(n - 1));
}

/// Mass of an interior cell j (|j| >= 1): l_{|j|-1} - l_{|j|+1}.
[[nodiscard]] inline double subtraveling_area(double alpha, CellIndex j) {
  detail::require_alpha_in_range(alpha);
  if (j == 0) throw std::domain_error("cell 0 carries 2(l_0 - l_1); use coarse_distribution");
  const CellIndex a = j < 0 ? -j : j;
  return SlicerFamily(alpha).position_drop(a - 1, a + 1);
}

/// Coarse-grained distribution rho^G_n over cell indices.
///
/// Stored as the non-negative half; mass(-j) == mass(j) by construction.
class CoarseGrainedDistribution {
 public:
  CoarseGrainedDistribution(std::uint64_t n, double alpha, std::vector<double> half)
      : n_(n), alpha_(alpha), half_(std::move(half)) {}

  [[nodiscard]] std::uint64_t time() const noexcept { return n_; }
  [[nodiscard]] double alpha() const noexcept { return alpha_; }

  [[nodiscard]] double mass(CellIndex j) const noexcept {
    const auto a = static_cast<std::uint64_t>(j < 0 ? -j : j);
    return a <= n_ ? half_[a] : 0.0;
  }

  /// Occupied cells -n, -n+2, ..., n in increasing order.
  [[nodiscard]] std::vector<CellIndex> support() const {
    std::vector<CellIndex> cells;
    const auto n = static_cast<CellIndex>(n_);
    for (CellIndex j = -n; j <= n; j += 2) cells.push_back(j);
    return cells;
  }

  [[nodiscard]] double total_mass() const noexcept {
    CompensatedSum<double> acc;
    for (CellIndex j : support()) acc.add(mass(j));
    return acc.value();
  }

 private:
  std::uint64_t n_;
  double alpha_;
  std::vector<double> half_;
};

/// rho^G_n assembled from the traveling and sub-traveling areas.
///
/// Even n: 2(l_0 - l_1) at 0, l_{2k-1} - l_{2k+1} at +-2k, l_{n-1} at +-n.
/// Odd n:  l_{2k} - l_{2k+2} at +-(2k+1), l_{n-1} at +-n.
[[nodiscard]] inline CoarseGrainedDistribution coarse_distribution(double alpha, std::uint64_t n) {
  detail::require_alpha_in_range(alpha);
  if (n == 0) throw std::domain_error("coarse distribution is defined for n >= 1");
  const SlicerFamily family(alpha);
  std::vector<double> half(n + 1, 0.0);
  for (std::uint64_t j = n % 2; j < n; j += 2) {
    const auto c = static_cast<CellIndex>(j);
    half[j] = j == 0 ? 2.0 * family.position_drop(0, 1) : family.position_drop(c - 1, c + 1);
  }
  half[n] = family.position(static_cast<CellIndex>(n - 1));
  return {n, alpha, std::move(half)};
}

namespace detail {

/// (i + 1)^p - max(i - 1, 0)^p for even p, expanded so every term is
/// positive: 2 * sum_{k odd} C(p, k) i^(p-k).
[[nodiscard]] inline double telescoped_weight(std::uint64_t i, unsigned p) noexcept {
  if (i == 0) return 1.0;
  const double x = static_cast<double>(i);
  double sum = 0.0;
  double binom = 1.0;  // C(p, k)
  for (unsigned k = 1; k <= p; ++k) {
    binom = binom * static_cast<double>(p - k + 1) / static_cast<double>(k);
    if (k % 2 == 1) sum += binom * std::pow(x, static_cast<double>(p - k));
  }
  return 2.0 * sum;
}

}  // namespace detail

/// p-th moment sum_j A_j j^p of rho^G_n.
///
/// Odd p is exactly zero. Even p uses the telescoped form
///
///     2 * sum_{i = n-1, n-3, ... >= 0} l_i * ((i+1)^p - max(i-1, 0)^p)
///
/// which has only positive addends, so no cancellation between nearly equal
/// slicer positions occurs.
[[nodiscard]] inline double moment(double alpha, std::uint64_t n, unsigned p) {
  detail::require_alpha_in_range(alpha);
  if (n == 0) throw std::domain_error("moment is defined for n >= 1");
  if (p == 0) throw std::domain_error("moment order must be >= 1");
  if (p % 2 == 1) return 0.0;
  const SlicerFamily family(alpha);
  CompensatedSum<double> acc;
  for (std::uint64_t i = (n - 1) % 2; i < n; i += 2) {
    acc.add(family.position(static_cast<CellIndex>(i)) * detail::telescoped_weight(i, p));
  }
  return 2.0 * acc.value();
}

/// moment(alpha, n, p) for every n in [1, n_max], in O(n_max).
///
/// Entry n - 1 equals moment(alpha, n, p) bit for bit: both accumulate the
/// same addends in the same order.
[[nodiscard]] inline std::vector<double> moment_series(double alpha, std::uint64_t n_max, unsigned p) {
  detail::require_alpha_in_range(alpha);
  if (p == 0) throw std::domain_error("moment order must be >= 1");
  std::vector<double> out(n_max, 0.0);
  if (p % 2 == 1) return out;
  const SlicerFamily family(alpha);
  CompensatedSum<double> parity_sum[2];
  for (std::uint64_t i = 0; i < n_max; ++i) {
    auto& acc = parity_sum[i % 2];
    acc.add(family.position(static_cast<CellIndex>(i)) * detail::telescoped_weight(i, p));
    out[i] = 2.0 * acc.value();  // n = i + 1
  }
  return out;
}

/// Direct evaluation sum_{j=-n}^{n} A_j j^p from the distribution, pairing
/// +-j so odd orders cancel exactly. Independent of the telescoped route;
/// kept as a cross-check.
[[nodiscard]] inline double moment_direct(const CoarseGrainedDistribution& dist, unsigned p) {
  if (p == 0) throw std::domain_error("moment order must be >= 1");
  CompensatedSum<double> acc;
  const auto n = static_cast<CellIndex>(dist.time());
  for (CellIndex j = n % 2; j <= n; j += 2) {
    if (j == 0) continue;
    const double term = dist.mass(j) * std::pow(static_cast<double>(j), static_cast<double>(p));
    acc.add(p % 2 == 0 ? term + term : term - term);
  }
  return acc.value();
}

enum class TransportRegime { SubDiffusive, Diffusive, SuperDiffusive, Logarithmic };

[[nodiscard]] inline const char* to_string(TransportRegime r) noexcept {
  switch (r) {
    case TransportRegime::SubDiffusive: return "sub-diffusive";
    case TransportRegime::Diffusive: return "diffusive";
    case TransportRegime::SuperDiffusive: return "super-diffusive";
    case TransportRegime::Logarithmic: return "logarithmic";
  }
  return "unknown";
}

struct TransportClassification {
  /// 2 - alpha; empty in the logarithmic regime.
  std::optional<double> exponent;
  TransportRegime regime;
};

[[nodiscard]] inline TransportClassification transport_exponent(double alpha) {
  detail::require_alpha_in_range(alpha);
  if (alpha == 2.0) return {std::nullopt, TransportRegime::Logarithmic};
  const double gamma = 2.0 - alpha;
  if (alpha > 1.0) return {gamma, TransportRegime::SubDiffusive};
  if (alpha < 1.0) return {gamma, TransportRegime::SuperDiffusive};
  return {gamma, TransportRegime::Diffusive};
}

/// lim MSD / n^(2 - alpha) = 4 / (2 - alpha).
[[nodiscard]] inline double generalized_diffusion_coefficient(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) {
    throw std::domain_error("generalized diffusion coefficient needs alpha in (0, 2)");
  }
  return 4.0 / (2.0 - alpha);
}

/// lim <X^p_n> / n^(p - alpha) = 2p / (p - alpha) for even p.
///
/// Sub-traveling cells contribute alpha / (p - alpha) per side and the
/// traveling cell contributes 1 per side. p = 2 reproduces 4 / (2 - alpha).
[[nodiscard]] inline double moment_limit_constant(double alpha, unsigned p) {
  detail::require_alpha_in_range(alpha);
  if (p < 2 || p % 2 != 0) throw std::domain_error("moment limit constant needs an even order p >= 2");
  if (static_cast<double>(p) <= alpha) throw std::domain_error("p = alpha = 2 is the logarithmic regime");
  const double pd = static_cast<double>(p);
  return 2.0 * pd / (pd - alpha);
}

/// Large-j tail C / (m + 2^(1/alpha))^(alpha + 1) of rho^G_n.
[[nodiscard]] inline double asymptotic_tail(double alpha, std::uint64_t m, double constant) {
  if (!(constant > 0.0)) throw std::domain_error("tail constant must be positive");
  const SlicerFamily family(alpha);
  return constant / std::pow(static_cast<double>(m) + family.offset(), alpha + 1.0);
}

/// Default tail constant: the heavy-tail amplitude 2 alpha (equals 1 at alpha = 1/2).
[[nodiscard]] inline double default_tail_constant(double alpha) noexcept { return 2.0 * alpha; }

/// CSV export `j,mass`, with an optional `tail` overlay column.
inline void write_distribution_csv(std::ostream& os, const CoarseGrainedDistribution& dist,
                                   std::optional<double> tail_constant = std::nullopt) {
  if (tail_constant) {
    CsvWriter csv(os, {"j", "mass", "tail"});
    for (CellIndex j : dist.support()) {
      const auto a = static_cast<std::uint64_t>(j < 0 ? -j : j);
      csv.row(j, dist.mass(j), asymptotic_tail(dist.alpha(), a, *tail_constant));
    }
  } else {
    CsvWriter csv(os, {"j", "mass"});
    for (CellIndex j : dist.support()) csv.row(j, dist.mass(j));
  }
}

}  // namespace slicer
