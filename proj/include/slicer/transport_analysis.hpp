#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "slicer/closed_form.hpp"
#include "slicer/compensated_sum.hpp"
#include "slicer/io.hpp"
#include "slicer/levy_walk.hpp"
#include "slicer/sampling.hpp"

namespace slicer {

/// A time series (t, y) as produced by the moment kernels.
using Series = std::vector<std::pair<double, double>>;

struct FitWindow {
  double t_min;
  double t_max;
};

/// y ~ amplitude * t^exponent, fitted in log-log space.
struct PowerLawFit {
  double exponent;
  double amplitude;
  FitWindow window;
  double r_squared;
  std::size_t points;
};

/// y ~ intercept + slope * log t.
struct LogLawFit {
  double slope;
  double intercept;
  FitWindow window;
  double r_squared;
  std::size_t points;
};

/// The final decade [t_last / 10, t_last] of a series.
[[nodiscard]] inline FitWindow last_decade(const Series& series) {
  if (series.empty()) throw std::invalid_argument("empty series has no fit window");
  const double t_last = series.back().first;
  return {t_last / 10.0, t_last};
}

namespace detail {

/// Relative slack so grid points meant to sit on a window edge are kept.
inline constexpr double kWindowSlack = 1e-9;

[[nodiscard]] inline bool in_window(double t, FitWindow w) noexcept {
  return t >= w.t_min * (1.0 - kWindowSlack) && t <= w.t_max * (1.0 + kWindowSlack);
}

struct LineFit {
  double slope;
  double intercept;
  double r_squared;
};

/// Ordinary least squares on centred data.
inline LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  CompensatedSum<double> sx, sy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx.add(x[i]);
    sy.add(y[i]);
  }
  const double mx = sx.value() / n;
  const double my = sy.value() / n;
  CompensatedSum<double> sxx, sxy, syy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx.add(dx * dx);
    sxy.add(dx * dy);
    syy.add(dy * dy);
  }
  if (!(sxx.value() > 0.0)) throw std::invalid_argument("fit window needs distinct abscissae");
  const double slope = sxy.value() / sxx.value();
  const double intercept = my - slope * mx;
  CompensatedSum<double> ss_res;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (intercept + slope * x[i]);
    ss_res.add(e * e);
  }
  const double r2 = syy.value() > 0.0 ? 1.0 - ss_res.value() / syy.value() : 1.0;
  return {slope, intercept, std::clamp(r2, 0.0, 1.0)};
}

inline void select_window(const Series& series, FitWindow window, bool log_y, std::vector<double>& x,
                          std::vector<double>& y) {
  for (const auto& [t, v] : series) {
    if (!in_window(t, window)) continue;
    if (!(t > 0.0)) throw std::invalid_argument("fit requires t > 0");
    if (log_y && !(v > 0.0)) throw std::invalid_argument("power-law fit requires y > 0");
    x.push_back(std::log(t));
    y.push_back(log_y ? std::log(v) : v);
  }
  if (x.size() < 3) throw std::invalid_argument("fit needs at least 3 points in the window");
}

}  // namespace detail

[[nodiscard]] inline PowerLawFit fit_power_law(const Series& series, std::optional<FitWindow> window = {}) {
  const FitWindow w = window.value_or(last_decade(series));
  std::vector<double> x, y;
  detail::select_window(series, w, true, x, y);
  const auto line = detail::least_squares(x, y);
  return {line.slope, std::exp(line.intercept), w, line.r_squared, x.size()};
}

[[nodiscard]] inline LogLawFit fit_log_law(const Series& series, std::optional<FitWindow> window = {}) {
  const FitWindow w = window.value_or(last_decade(series));
  std::vector<double> x, y;
  detail::select_window(series, w, false, x, y);
  const auto line = detail::least_squares(x, y);
  return {line.slope, line.intercept, w, line.r_squared, x.size()};
}

/// Mean of y / t^gamma over the final decade of the series.
[[nodiscard]] inline double estimate_generalized_diffusion(const Series& series, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 2.0)) throw std::domain_error("gamma must lie in [0, 2]");
  if (series.empty()) throw std::invalid_argument("empty tail window");
  const auto w = last_decade(series);
  CompensatedSum<double> acc;
  std::size_t count = 0;
  for (const auto& [t, y] : series) {
    if (!detail::in_window(t, w)) continue;
    acc.add(y / std::pow(t, gamma));
    ++count;
  }
  if (count == 0) throw std::invalid_argument("empty tail window");
  return acc.value() / static_cast<double>(count);
}

/// Closed-form p-th moment of the slicer on an integer time grid.
[[nodiscard]] inline Series closed_form_moment_series(double alpha, std::span<const std::uint64_t> times,
                                                      unsigned p) {
  if (times.empty()) return {};
  const auto all = moment_series(alpha, times.back(), p);
  Series out;
  out.reserve(times.size());
  for (auto n : times) {
    if (n == 0) throw std::invalid_argument("closed-form moments start at n = 1");
    out.emplace_back(static_cast<double>(n), all[n - 1]);
  }
  return out;
}

/// Compute budget for a slicer-vs-walk comparison.
struct ComparisonBudget {
  std::uint64_t slicer_steps = 100000;
  std::size_t points_per_decade = 20;
  WalkConfig walk;
  double r0 = 1.0;
};

struct ComparisonRow {
  double p;
  double slicer_theory;
  double slicer_fitted;
  /// Empty on the walk's marginal lines.
  std::optional<double> levy_theory;
  double levy_fitted;
  double fitted_delta;
  std::optional<double> theory_delta;
  bool flagged;
};

struct ComparisonReport {
  double beta;
  double alpha;
  double threshold;
  std::vector<ComparisonRow> rows;

  [[nodiscard]] bool any_flagged() const noexcept {
    for (const auto& r : rows) {
      if (r.flagged) return true;
    }
    return false;
  }
};

/// Agreement threshold on fitted-vs-fitted exponent differences.
inline constexpr double kComparisonThreshold = 0.15;

/// Walk exponent for <|r|^p>: the moment table, or the MSD law at p = 2
/// where the moment table is silent (beta = 1, beta = 3/2).
[[nodiscard]] inline std::optional<double> levy_theory_exponent(double beta, double p) {
  if (p == 2.0) return predicted_msd_exponent(beta);
  return predicted_moment_exponent(beta, p);
}

/// Fits both processes' moment growth over their last decade and compares.
///
/// The slicer side uses the exact closed-form moments of the ensemble (the
/// N -> infinity limit); the walk side is simulated. Moments are of
/// |displacement|, which for even p equals the signed moment.
[[nodiscard]] inline ComparisonReport compare_slicer_levy(double beta, std::span<const double> p_list,
                                                          const ComparisonBudget& budget) {
  const double alpha = alpha_from_beta(beta);
  const auto levy = run_levy_ensemble(budget.walk, beta, budget.r0, {p_list.begin(), p_list.end()});
  const auto grid = geometric_integer_grid(1, budget.slicer_steps, budget.points_per_decade);

  ComparisonReport report{beta, alpha, kComparisonThreshold, {}};
  for (std::size_t q = 0; q < p_list.size(); ++q) {
    const double p = p_list[q];
    const auto pi = static_cast<unsigned>(p);
    if (static_cast<double>(pi) != p || pi % 2 != 0) {
      throw std::invalid_argument("slicer moments are compared for even integer orders");
    }
    const auto slicer_fit = fit_power_law(closed_form_moment_series(alpha, grid, pi));
    Series walk_series;
    for (std::size_t k = 0; k < levy.times.size(); ++k) walk_series.emplace_back(levy.times[k], levy.moments[q][k]);
    const auto walk_fit = fit_power_law(walk_series);

    ComparisonRow row{};
    row.p = p;
    row.slicer_theory = p - alpha;
    row.slicer_fitted = slicer_fit.exponent;
    row.levy_theory = levy_theory_exponent(beta, p);
    row.levy_fitted = walk_fit.exponent;
    row.fitted_delta = std::abs(row.slicer_fitted - row.levy_fitted);
    if (row.levy_theory) row.theory_delta = std::abs(row.slicer_theory - *row.levy_theory);
    row.flagged = row.fitted_delta > kComparisonThreshold;
    report.rows.push_back(row);
  }
  return report;
}

/// Fixed-width table of a report.
inline void write_comparison_table(std::ostream& os, const ComparisonReport& report) {
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%10.4f", v);
    return std::string(buf);
  };
  os << "beta = " << format_real(report.beta) << "  alpha = " << format_real(report.alpha)
     << "  threshold = " << format_real(report.threshold) << '\n';
  os << "    p   slicer_th  slicer_fit    levy_th    levy_fit   |delta|  flag\n";
  for (const auto& r : report.rows) {
    char pbuf[16];
    std::snprintf(pbuf, sizeof pbuf, "%5.2f", r.p);
    os << pbuf << ' ' << fmt(r.slicer_theory) << ' ' << fmt(r.slicer_fitted) << ' '
       << (r.levy_theory ? fmt(*r.levy_theory) : std::string("  marginal")) << ' ' << fmt(r.levy_fitted) << ' '
       << fmt(r.fitted_delta) << "  " << (r.flagged ? "DIFF" : "ok") << '\n';
  }
}

}  // namespace slicer
