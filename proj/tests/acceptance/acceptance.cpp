// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance <id>...    run the named criteria (1-9, tail)
//
// Exit status is 0 only if every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cli_app.hpp"
#include "slicer/slicer.hpp"

namespace {

using namespace slicer;
namespace fs = std::filesystem;

// Pinned tolerances.
constexpr double kEntryTol = 1e-13;
constexpr double kMassTol = 1e-12;
constexpr double kExactLayerSeconds = 10.0;
constexpr double kCoefficientRelTol = 0.05;
constexpr double kCoefficientSeconds = 30.0;
constexpr double kMsdExponentTol = 0.02;
constexpr double kLogR2Min = 0.99;
constexpr double kHigherExponentTol = 0.05;
constexpr double kHigherConstantRelTol = 0.05;
constexpr double kDriftSigmas = 5.0;
constexpr double kBinomialSigmas = 3.0;
constexpr double kMcSeconds = 60.0;
constexpr double kLevyExponentTol = 0.1;
constexpr double kLevySeconds = 600.0;
constexpr double kIdentityTol = 1e-12;
constexpr double kFittedAgreementTol = 0.15;
constexpr double kTailFlatness = 0.10;

class Report {
 public:
  void check(bool ok, const std::string& what) {
    pass_ = pass_ && ok;
    std::cout << "    " << (ok ? "ok   " : "FAIL ") << what << '\n';
  }
  [[nodiscard]] bool pass() const noexcept { return pass_; }

 private:
  bool pass_ = true;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double last_decade_mean(const Series& s, double gamma) {
  const auto w = last_decade(s);
  double acc = 0.0;
  int count = 0;
  for (const auto& [t, y] : s) {
    if (t < w.t_min * (1.0 - 1e-9)) continue;
    acc += y / std::pow(t, gamma);
    ++count;
  }
  return acc / count;
}

Series to_series(const std::vector<double>& t, const std::vector<double>& y) {
  Series s;
  for (std::size_t k = 0; k < t.size(); ++k) s.emplace_back(t[k], y[k]);
  return s;
}

void exact_layer(Report& r) {
  const auto start = std::chrono::steady_clock::now();
  for (double alpha : {1.0 / 3.0, 0.5, 1.0, 1.5, 2.0}) {
    const SlicerFamily family(alpha);
    auto occ = uniform_initial();
    double worst_entry = 0.0;
    double worst_mass = 0.0;
    for (std::uint64_t n = 1; n <= 200; ++n) {
      occ = evolve_occupancy(family, occ);
      const auto exact = areas(occ);
      const auto closed = coarse_distribution(alpha, n);
      double total = 0.0;
      for (const auto& [j, a] : exact) {
        worst_entry = std::max(worst_entry, std::abs(a - closed.mass(j)));
        total += a;
      }
      for (CellIndex j : closed.support()) {
        if (!exact.contains(j)) worst_entry = std::max(worst_entry, std::abs(closed.mass(j)));
      }
      worst_mass = std::max({worst_mass, std::abs(total - 1.0), std::abs(closed.total_mass() - 1.0)});
    }
    r.check(worst_entry <= kEntryTol, "alpha=" + fmt(alpha) + " max entry error " + fmt(worst_entry) + " <= " +
                                          fmt(kEntryTol));
    r.check(worst_mass <= kMassTol, "alpha=" + fmt(alpha) + " max mass error " + fmt(worst_mass) + " <= " +
                                        fmt(kMassTol));
  }
  const double secs = seconds_since(start);
  r.check(secs < kExactLayerSeconds, "runtime " + fmt(secs) + " s < " + fmt(kExactLayerSeconds) + " s");
}

void coefficients(Report& r) {
  struct Case {
    double alpha;
    std::uint64_t n;
    double expected;
  };
  for (const Case c : {Case{0.5, 10000, 8.0 / 3.0}, Case{1.0 / 3.0, 100000, 12.0 / 5.0}}) {
    const auto start = std::chrono::steady_clock::now();
    const double msd = moment(c.alpha, c.n, 2);
    const double secs = seconds_since(start);
    const double value = msd / std::pow(static_cast<double>(c.n), 2.0 - c.alpha);
    const double rel = std::abs(value / c.expected - 1.0);
    r.check(rel <= kCoefficientRelTol, "alpha=" + fmt(c.alpha) + " n=" + std::to_string(c.n) + " msd/n^(2-alpha) " +
                                           fmt(value) + " vs " + fmt(c.expected) + " (rel " + fmt(rel) + ")");
    r.check(secs < kCoefficientSeconds, "runtime " + fmt(secs) + " s < " + fmt(kCoefficientSeconds) + " s");
  }
}

void exponents(Report& r) {
  const auto grid = geometric_integer_grid(1, 100000, 20);
  for (double alpha : {1.0 / 3.0, 0.5, 1.0, 1.5}) {
    const auto fit = fit_power_law(closed_form_moment_series(alpha, grid, 2));
    r.check(std::abs(fit.exponent - (2.0 - alpha)) <= kMsdExponentTol,
            "alpha=" + fmt(alpha) + " fitted " + fmt(fit.exponent) + " vs " + fmt(2.0 - alpha));
  }
  const auto log_grid = geometric_integer_grid(10000, 1000000, 20);
  const auto series = closed_form_moment_series(2.0, log_grid, 2);
  const FitWindow window{1e4, 1e6};
  const auto log_fit = fit_log_law(series, window);
  const auto power_fit = fit_power_law(series, window);
  r.check(log_fit.r_squared >= kLogR2Min, "alpha=2 log fit r^2 " + fmt(log_fit.r_squared) + " >= " + fmt(kLogR2Min));
  r.check(power_fit.r_squared < log_fit.r_squared,
          "alpha=2 power fit r^2 " + fmt(power_fit.r_squared) + " < log fit r^2 " + fmt(log_fit.r_squared));
}

void higher_moments(Report& r) {
  const auto grid = geometric_integer_grid(1, 100000, 20);
  for (double alpha : {1.0 / 3.0, 0.5}) {
    for (unsigned p : {4u, 6u}) {
      const double pd = static_cast<double>(p);
      const auto series = closed_form_moment_series(alpha, grid, p);
      const auto fit = fit_power_law(series);
      const std::string tag = "alpha=" + fmt(alpha) + " p=" + std::to_string(p);
      r.check(std::abs(fit.exponent - (pd - alpha)) <= kHigherExponentTol,
              tag + " fitted " + fmt(fit.exponent) + " vs " + fmt(pd - alpha));
      const double tail = last_decade_mean(series, pd - alpha);
      const double supported = 2.0 * pd / (pd - alpha);
      const double rejected = pd / (pd - alpha);
      const double rel = std::abs(tail / supported - 1.0);
      r.check(rel <= kHigherConstantRelTol, tag + " tail " + fmt(tail) + " vs 2p/(p-alpha) " + fmt(supported) +
                                                " (rel " + fmt(rel) + "); p/(p-alpha) " + fmt(rejected) + " off by " +
                                                fmt(std::abs(tail / rejected - 1.0)));
    }
  }
}

void drift(Report& r) {
  bool all_zero = true;
  for (double alpha : {1.0 / 3.0, 0.5, 1.0, 1.5, 2.0}) {
    for (unsigned p : {1u, 3u, 5u}) {
      for (std::uint64_t n = 1; n <= 200; ++n) {
        all_zero = all_zero && moment(alpha, n, p) == 0.0 &&
                   moment_direct(coarse_distribution(alpha, n), p) == 0.0;
      }
      for (double v : moment_series(alpha, 100000, p)) all_zero = all_zero && v == 0.0;
    }
  }
  r.check(all_zero, "closed-form odd moments p in {1,3,5} are exactly 0");
  for (double alpha : {1.0 / 3.0, 0.5, 1.0, 1.5, 2.0}) {
    EnsembleConfig cfg;
    cfg.alpha = alpha;
    cfg.particles = 10000;
    cfg.steps = 1000;
    cfg.seed = 0;
    const auto m = empirical_moment(cfg, 1).back();
    r.check(std::abs(m.value) <= kDriftSigmas * m.std_error,
            "alpha=" + fmt(alpha) + " MC first moment " + fmt(m.value) + " within " + fmt(kDriftSigmas) + " SE (" +
                fmt(m.std_error) + ")");
  }
}

void monte_carlo(Report& r) {
  const auto start = std::chrono::steady_clock::now();
  EnsembleConfig cfg;
  cfg.alpha = 1.0;
  cfg.particles = 100000;
  cfg.steps = 2;
  const auto h = run_ensemble(cfg).back();
  for (CellIndex j : {-2, 0, 2}) {
    const double f = h.frequency(j);
    const double se = std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / static_cast<double>(cfg.particles));
    r.check(std::abs(f - 1.0 / 3.0) <= kBinomialSigmas * se,
            "n=2 j=" + std::to_string(j) + " frequency " + fmt(f) + " vs 1/3 (" + fmt(kBinomialSigmas) + " SE = " +
                fmt(kBinomialSigmas * se) + ")");
  }
  const auto closed = coarse_distribution(1.0, 100);
  double prev = INFINITY;
  for (std::uint64_t particles : {1000u, 10000u, 100000u}) {
    cfg.particles = particles;
    cfg.steps = 100;
    const auto hist = run_ensemble(cfg).back();
    double sup = 0.0;
    for (CellIndex j = -100; j <= 100; ++j) {
      const double exact = (j % 2 == 0) ? closed.mass(j) : 0.0;
      sup = std::max(sup, std::abs(hist.frequency(j) - exact));
    }
    r.check(sup < prev, "n=100 N=" + std::to_string(particles) + " sup-norm " + fmt(sup) + " < previous " + fmt(prev));
    prev = sup;
  }
  const double secs = seconds_since(start);
  r.check(secs < kMcSeconds, "runtime " + fmt(secs) + " s < " + fmt(kMcSeconds) + " s");
}

void levy(Report& r) {
  const auto start = std::chrono::steady_clock::now();
  WalkConfig cfg;
  cfg.t_max = 1e5;
  cfg.environments = 200;
  cfg.walkers_per_environment = 50;
  cfg.seed = 0;
  struct Case {
    double beta;
    double msd;
    std::optional<double> visited;
  };
  for (const Case c : {Case{0.5, 11.0 / 6.0, 1.0 / 3.0}, Case{1.25, 1.25, std::nullopt}, Case{2.0, 1.0, 0.5}}) {
    const auto res = run_levy_ensemble(cfg, c.beta, 1.0, {2.0});
    const auto msd = fit_power_law(to_series(res.times, res.moments[0]));
    r.check(std::abs(msd.exponent - c.msd) <= kLevyExponentTol,
            "beta=" + fmt(c.beta) + " MSD exponent " + fmt(msd.exponent) + " vs " + fmt(c.msd));
    if (c.visited) {
      const auto vis = fit_power_law(to_series(res.times, res.mean_visited));
      r.check(std::abs(vis.exponent - *c.visited) <= kLevyExponentTol,
              "beta=" + fmt(c.beta) + " visited exponent " + fmt(vis.exponent) + " vs " + fmt(*c.visited));
    }
  }
  const double secs = seconds_since(start);
  r.check(secs < kLevySeconds, "runtime " + fmt(secs) + " s < " + fmt(kLevySeconds) + " s");
}

void equivalence(Report& r) {
  int checked = 0;
  double worst = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double beta = 1.5 * k / 100.0;
    worst = std::max(worst, std::abs(predicted_msd_exponent(beta) - (2.0 - alpha_from_beta(beta))));
    for (double p : {2.0, 4.0, 6.0}) {
      // the moment table has a single branch only above both knees, and
      // none at all at beta = 1
      if (beta == 1.0 || !(p > std::max(beta, 2.0 * beta - 1.0))) continue;
      const auto walk = predicted_moment_exponent(beta, p);
      worst = std::max(worst, walk ? std::abs(*walk - (p - alpha_from_beta(beta))) : INFINITY);
      ++checked;
    }
  }
  r.check(worst <= kIdentityTol, "identity over 100 beta in (0, 3/2]: " + std::to_string(checked) +
                                     " moment branches + 100 MSD laws, max error " + fmt(worst));
  const std::vector<double> orders{2.0};
  for (double beta : {0.5, 1.0, 1.25}) {
    const auto report = compare_slicer_levy(beta, orders, ComparisonBudget{});
    const auto& row = report.rows.front();
    r.check(row.fitted_delta <= kFittedAgreementTol, "beta=" + fmt(beta) + " slicer fit " + fmt(row.slicer_fitted) +
                                                         " vs walk fit " + fmt(row.levy_fitted) + " (|delta| " +
                                                         fmt(row.fitted_delta) + ")");
  }
}

struct CliResult {
  int rc;
  std::string out;
  std::string err;
};

CliResult cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int rc = cli::run(args, out, err);
  return {rc, out.str(), err.str()};
}

void determinism(Report& r) {
  const fs::path root = fs::temp_directory_path() / "slicer_acceptance_replay";
  fs::remove_all(root);
  const std::vector<std::vector<std::string>> commands{
      {"slicer-dist", "--alpha", "0.5", "--n", "1000"},
      {"slicer-msd", "--alpha", "0.5", "--n-max", "10000"},
      {"slicer-moments", "--alpha", "0.5", "--n-max", "10000", "--p", "2,4,6"},
      {"mc", "--alpha", "0.5", "--N", "20000", "--n", "1000", "--seed", "7", "--threads", "1"},
      {"levy", "--beta", "1.25", "--t-max", "10000", "--n-env", "20", "--n-walkers", "10", "--seed", "7", "--threads",
       "1"},
      {"compare", "--beta", "0.5", "--t-max", "10000", "--n-env", "20", "--n-walkers", "10", "--slicer-steps", "10000",
       "--threads", "1"},
  };
  for (const auto& base : commands) {
    const fs::path dir = root / base.front();
    auto args = base;
    args.insert(args.end(), {"--out", dir.string()});
    const auto first = cli(args);
    if (first.rc != 0) {
      r.check(false, base.front() + " run failed: " + first.err);
      continue;
    }
    const auto manifest = (dir / (base.front() + ".manifest.json")).string();
    const auto replay = cli({"replay", manifest, "--threads", "4"});
    const bool identical = replay.rc == 0 && replay.out.find("MISMATCH") == std::string::npos &&
                           replay.out.find("match") != std::string::npos;
    r.check(identical, base.front() + " replay with --threads 4 byte-identical");
  }
  fs::remove_all(root);
}

void tail(Report& r) {
  constexpr std::uint64_t n = 100000;
  for (double alpha : {1.0 / 3.0, 0.5}) {
    const auto dist = coarse_distribution(alpha, n);
    const double offset = std::exp2(1.0 / alpha);
    double lo = INFINITY, hi = 0.0;
    for (CellIndex j = 10; j <= static_cast<CellIndex>(n / 100); j += 2) {
      const double v = dist.mass(j) * std::pow(static_cast<double>(j) + offset, alpha + 1.0);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double spread = hi / lo - 1.0;
    r.check(spread <= kTailFlatness, "alpha=" + fmt(alpha) + " rho*(j+2^(1/alpha))^(alpha+1) over 10<=j<=n/100: " +
                                         "range [" + fmt(lo) + ", " + fmt(hi) + "], spread " + fmt(spread));
  }
}

struct Criterion {
  std::string id;
  std::string title;
  std::function<void(Report&)> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {"1", "exact layer matches closed form", exact_layer},
      {"2", "generalized diffusion coefficients", coefficients},
      {"3", "transport exponents and logarithmic regime", exponents},
      {"4", "higher moments", higher_moments},
      {"5", "odd moments and drift", drift},
      {"6", "Monte Carlo consistency", monte_carlo},
      {"7", "Levy walk regimes", levy},
      {"8", "slicer / Levy walk equivalence", equivalence},
      {"9", "determinism under replay", determinism},
      {"tail", "heavy tail flatness", tail},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> wanted(argv + 1, argv + argc);
  bool all_pass = true;
  int ran = 0;
  for (const auto& c : criteria()) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    ++ran;
    Report report;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(report);
    } catch (const std::exception& e) {
      report.check(false, std::string("exception: ") + e.what());
    }
    std::cout << (report.pass() ? "PASS " : "FAIL ") << c.id << ": " << c.title << " (" << fmt(seconds_since(start))
              << " s)" << std::endl;
    all_pass = all_pass && report.pass();
  }
  if (ran == 0) {
    std::cerr << "unknown criterion; expected 1-9 or tail\n";
    return 2;
  }
  return all_pass ? 0 : 1;
}
