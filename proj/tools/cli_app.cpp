#include "cli_app.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "slicer/slicer.hpp"

namespace slicer::cli {

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int{md[i]};
  return hex.str();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr const char* kOutDirEnv = "SLICER_OUT_DIR";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require(bool ok, std::string_view flag, std::string_view what) {
  if (!ok) throw UsageError(std::string(flag) + ": " + std::string(what));
}

void require_alpha(double alpha) {
  require(std::isfinite(alpha) && alpha > 0.0 && alpha <= 2.0, "--alpha", "must lie in (0, 2], got " + format_real(alpha));
}

void require_positive(double v, std::string_view flag) {
  require(std::isfinite(v) && v > 0.0, flag, "must be a positive finite number, got " + format_real(v));
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ',';
    if constexpr (std::is_floating_point_v<T>) {
      s += format_real(values[i]);
    } else {
      s += std::to_string(values[i]);
    }
  }
  return s;
}

/// Canonical argv and parameter echo, built from parsed values so that a
/// replay sees exactly the numbers the run used.
class Echo {
 public:
  explicit Echo(std::string command) : command_(command), argv_{std::move(command)} {}

  void real(const std::string& flag, double v) { push(flag, format_real(v), v); }
  void uint(const std::string& flag, std::uint64_t v) { push(flag, std::to_string(v), v); }
  void text(const std::string& flag, const std::string& v) { push(flag, v, v); }
  void flag(const std::string& flag, bool on) {
    if (on) argv_.push_back("--" + flag);
    params_[flag] = on;
  }
  template <typename T>
  void list(const std::string& flag, const std::vector<T>& v) {
    push(flag, join(v), json(v));
  }

  [[nodiscard]] const std::string& command() const noexcept { return command_; }
  [[nodiscard]] const std::vector<std::string>& argv() const noexcept { return argv_; }
  [[nodiscard]] const json& params() const noexcept { return params_; }

 private:
  void push(const std::string& flag, std::string text, json value) {
    argv_.push_back("--" + flag);
    argv_.push_back(std::move(text));
    params_[flag] = std::move(value);
  }

  std::string command_;
  std::vector<std::string> argv_;
  json params_ = json::object();
};

/// Files of one run, written in full and digested as they go.
class RunOutputs {
 public:
  explicit RunOutputs(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void write(const std::string& name, const std::string& content) {
    std::ofstream f(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
    f << content;
    if (!f) throw std::runtime_error("write failed for " + (dir_ / name).string());
    files_.push_back({{"file", name}, {"sha256", sha256_hex(content)}});
  }

  void manifest(const Echo& echo, const std::vector<std::uint64_t>& seeds, unsigned threads) {
    json m;
    m["command"] = echo.command();
    m["version"] = kVersion;
    m["argv"] = echo.argv();
    m["parameters"] = echo.params();
    m["seeds"] = seeds;
    m["threads"] = resolve_threads(threads);
    m["outputs"] = files_;
    std::ofstream f(dir_ / (echo.command() + ".manifest.json"), std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write manifest in " + dir_.string());
    f << m.dump(2) << '\n';
  }

  [[nodiscard]] const fs::path& dir() const noexcept { return dir_; }

 private:
  fs::path dir_;
  json files_ = json::array();
};

std::string default_out_dir() {
  const char* env = std::getenv(kOutDirEnv);
  return env && *env ? std::string(env) : std::string(".");
}

/// Options every file-producing command accepts.
struct Common {
  std::string out_dir = default_out_dir();
  std::string config;
  unsigned threads = 0;
  double max_seconds = 0.0;

  void attach(CLI::App* sub, bool parallel) {
    sub->add_option("--out", out_dir, "Output directory (default: $" + std::string(kOutDirEnv) + " or .)");
    sub->add_option("--config", config, "Flat key=value file; command-line flags take precedence");
    if (parallel) {
      sub->add_option("--threads", threads, "Worker cap, 0 = all cores; never changes results");
      sub->add_option("--max-seconds", max_seconds, "Wall-clock cap, 0 = none; exceeding it exits with 3");
    }
  }

  [[nodiscard]] Budget budget() const {
    require(std::isfinite(max_seconds) && max_seconds >= 0.0, "--max-seconds", "must be >= 0");
    if (max_seconds == 0.0) return Budget::unlimited();
    return Budget(std::chrono::duration<double>(max_seconds));
  }
};

// ---------------------------------------------------------------- slicer-dist

struct DistArgs {
  Common common;
  double alpha = 0.0;
  std::uint64_t n = 0;
  bool tail = false;
  double tail_constant = 0.0;
  std::string format = "csv";
};

int cmd_slicer_dist(const DistArgs& a, std::ostream& out) {
  require_alpha(a.alpha);
  require(a.n >= 1, "--n", "must be >= 1");
  require(a.format == "csv" || a.format == "json", "--format", "must be csv or json");
  require(a.tail_constant == 0.0 || (std::isfinite(a.tail_constant) && a.tail_constant > 0.0), "--tail-constant",
          "must be positive");
  const bool tail = a.tail || a.tail_constant > 0.0;
  const double constant = a.tail_constant > 0.0 ? a.tail_constant : default_tail_constant(a.alpha);

  Echo echo("slicer-dist");
  echo.real("alpha", a.alpha);
  echo.uint("n", a.n);
  echo.flag("tail", tail);
  if (tail) echo.real("tail-constant", constant);
  echo.text("format", a.format);

  const auto dist = coarse_distribution(a.alpha, a.n);
  std::ostringstream body;
  std::string name;
  if (a.format == "csv") {
    write_distribution_csv(body, dist, tail ? std::optional<double>(constant) : std::nullopt);
    name = "slicer_dist.csv";
  } else {
    json records = json::array();
    for (CellIndex j : dist.support()) {
      json r{{"alpha", a.alpha}, {"n", a.n}, {"j", j}, {"mass", dist.mass(j)}};
      if (tail) r["tail"] = asymptotic_tail(a.alpha, static_cast<std::uint64_t>(j < 0 ? -j : j), constant);
      records.push_back(std::move(r));
    }
    body << records.dump(2) << '\n';
    name = "slicer_dist.json";
  }
  RunOutputs files(a.common.out_dir);
  files.write(name, body.str());
  files.manifest(echo, {}, 1);
  out << "wrote " << (files.dir() / name).string() << '\n';
  return kExitOk;
}

// ------------------------------------------------------ slicer-msd / -moments

struct MomentsArgs {
  Common common;
  double alpha = 0.0;
  std::uint64_t n_max = 0;
  std::vector<unsigned> p{2, 4};
  std::size_t points_per_decade = 20;
  std::string format = "csv";
};

constexpr std::uint64_t kMaxClosedFormSteps = 100000000;

std::vector<std::uint64_t> time_grid(std::uint64_t lo, std::uint64_t n_max, std::size_t per_decade) {
  if (lo > n_max) return {};
  if (per_decade == 0) {
    std::vector<std::uint64_t> all;
    for (std::uint64_t n = lo; n <= n_max; ++n) all.push_back(n);
    return all;
  }
  return geometric_integer_grid(lo, n_max, per_decade);
}

void check_moment_args(const MomentsArgs& a) {
  require_alpha(a.alpha);
  require(a.n_max >= 1 && a.n_max <= kMaxClosedFormSteps, "--n-max", "must lie in [1, 1e8]");
  require(a.format == "csv" || a.format == "json", "--format", "must be csv or json");
}

int cmd_slicer_msd(const MomentsArgs& a, std::ostream& out) {
  check_moment_args(a);
  const bool log_regime = a.alpha == 2.0;
  Echo echo("slicer-msd");
  echo.real("alpha", a.alpha);
  echo.uint("n-max", a.n_max);
  echo.uint("points-per-decade", a.points_per_decade);

  const auto grid = time_grid(log_regime ? 2 : 1, a.n_max, a.points_per_decade);
  const auto msd = moment_series(a.alpha, a.n_max, 2);
  std::ostringstream body;
  if (log_regime) {
    CsvWriter csv(body, {"n", "msd", "normalized", "log_normalized"});
    for (auto n : grid) {
      const double m = msd[n - 1];
      csv.row(n, m, m, m / std::log(static_cast<double>(n)));
    }
  } else {
    CsvWriter csv(body, {"n", "msd", "normalized"});
    for (auto n : grid) {
      const double m = msd[n - 1];
      csv.row(n, m, m / std::pow(static_cast<double>(n), 2.0 - a.alpha));
    }
  }
  RunOutputs files(a.common.out_dir);
  files.write("slicer_msd.csv", body.str());
  files.manifest(echo, {}, 1);
  out << "wrote " << (files.dir() / "slicer_msd.csv").string() << '\n';
  return kExitOk;
}

int cmd_slicer_moments(const MomentsArgs& a, std::ostream& out) {
  check_moment_args(a);
  require(!a.p.empty(), "--p", "needs at least one order");
  for (unsigned p : a.p) require(p >= 1 && p <= 64, "--p", "orders must lie in [1, 64]");
  const bool log_regime = a.alpha == 2.0;
  Echo echo("slicer-moments");
  echo.real("alpha", a.alpha);
  echo.uint("n-max", a.n_max);
  echo.list("p", a.p);
  echo.uint("points-per-decade", a.points_per_decade);
  echo.text("format", a.format);

  const auto grid = time_grid(log_regime ? 2 : 1, a.n_max, a.points_per_decade);
  std::ostringstream body;
  json records = json::array();
  std::optional<CsvWriter> csv;
  if (a.format == "csv") {
    if (log_regime) {
      csv.emplace(body, std::initializer_list<std::string_view>{"n", "p", "moment", "normalized", "log_normalized"});
    } else {
      csv.emplace(body, std::initializer_list<std::string_view>{"n", "p", "moment", "normalized"});
    }
  }
  for (unsigned p : a.p) {
    const auto series = moment_series(a.alpha, a.n_max, p);
    for (auto n : grid) {
      const double m = series[n - 1];
      const double nd = static_cast<double>(n);
      const double normalized = m / std::pow(nd, static_cast<double>(p) - a.alpha);
      if (csv) {
        if (log_regime) {
          csv->row(n, p, m, normalized, m / std::log(nd));
        } else {
          csv->row(n, p, m, normalized);
        }
      } else {
        records.push_back({{"alpha", a.alpha}, {"n", n}, {"p", p}, {"value", m}});
      }
    }
  }
  const std::string name = csv ? "slicer_moments.csv" : "slicer_moments.json";
  if (!csv) body << records.dump(2) << '\n';
  RunOutputs files(a.common.out_dir);
  files.write(name, body.str());
  files.manifest(echo, {}, 1);
  out << "wrote " << (files.dir() / name).string() << '\n';
  return kExitOk;
}

// ------------------------------------------------------------------------- mc

struct McArgs {
  Common common;
  double alpha = 0.0;
  std::uint64_t particles = 0;
  std::uint64_t steps = 0;
  std::uint64_t seed = 0;
  std::size_t points_per_decade = 10;
  std::vector<unsigned> p{1, 2, 4};
  bool mirror = false;
};

constexpr std::uint64_t kMaxMcSteps = 100000000;

int cmd_mc(const McArgs& a, std::ostream& out) {
  require_alpha(a.alpha);
  require(a.particles >= 1, "--N", "must be >= 1");
  require(a.steps >= 1 && a.steps <= kMaxMcSteps, "--n", "must lie in [1, 1e8]");
  require(a.points_per_decade >= 1, "--points-per-decade", "must be >= 1");
  for (unsigned p : a.p) require(p >= 1 && p <= 64, "--p", "orders must lie in [1, 64]");
  Echo echo("mc");
  echo.real("alpha", a.alpha);
  echo.uint("N", a.particles);
  echo.uint("n", a.steps);
  echo.uint("seed", a.seed);
  echo.uint("points-per-decade", a.points_per_decade);
  echo.list("p", a.p);
  echo.flag("mirror", a.mirror);

  EnsembleConfig cfg;
  cfg.alpha = a.alpha;
  cfg.particles = a.particles;
  cfg.steps = a.steps;
  cfg.seed = a.seed;
  cfg.sample_times = geometric_integer_grid(1, a.steps, a.points_per_decade);
  cfg.mirror_initial = a.mirror;
  cfg.threads = a.common.threads;
  cfg.budget = a.common.budget();
  const auto histograms = run_ensemble(cfg);

  std::ostringstream hist_csv;
  {
    CsvWriter csv(hist_csv, {"j", "count", "frequency"});
    const auto& last = histograms.back();
    const double total = static_cast<double>(last.total());
    for (const auto& [cell, count] : last.counts) csv.row(cell, count, static_cast<double>(count) / total);
  }
  std::ostringstream msd_csv;
  {
    CsvWriter csv(msd_csv, {"n", "msd"});
    for (const auto& [n, m] : msd_series(histograms)) csv.row(n, m);
  }
  std::ostringstream moments_csv;
  {
    CsvWriter csv(moments_csv, {"n", "p", "moment", "std_error"});
    for (unsigned p : a.p) {
      for (const auto& e : empirical_moment(histograms, p)) csv.row(e.time, p, e.value, e.std_error);
    }
  }
  RunOutputs files(a.common.out_dir);
  files.write("mc_histogram.csv", hist_csv.str());
  files.write("mc_msd.csv", msd_csv.str());
  files.write("mc_moments.csv", moments_csv.str());
  files.manifest(echo, {a.seed}, a.common.threads);
  out << "wrote mc_histogram.csv, mc_msd.csv, mc_moments.csv to " << files.dir().string() << '\n';
  return kExitOk;
}

// ------------------------------------------------------------------ levy/compare

constexpr double kMaxFlightsPerWalker = 1e9;

struct WalkArgs {
  double r0 = 1.0;
  double velocity = 1.0;
  double t_max = 1e5;
  std::uint32_t environments = 200;
  std::uint32_t walkers = 50;
  std::uint64_t seed = 0;
  std::size_t points_per_decade = 20;

  void attach(CLI::App* sub) {
    sub->add_option("--r0", r0, "Gap cutoff");
    sub->add_option("--v", velocity, "Walker speed");
    sub->add_option("--t-max", t_max, "Final time");
    sub->add_option("--n-env", environments, "Number of quenched environments");
    sub->add_option("--n-walkers", walkers, "Walkers per environment");
    sub->add_option("--seed", seed, "Master seed");
    sub->add_option("--points-per-decade", points_per_decade, "Sample times per decade");
  }

  void check() const {
    require_positive(r0, "--r0");
    require_positive(velocity, "--v");
    require(std::isfinite(t_max) && t_max >= 1.0 && t_max <= 1e9, "--t-max", "must lie in [1, 1e9]");
    require(environments >= 1, "--n-env", "must be >= 1");
    require(walkers >= 1, "--n-walkers", "must be >= 1");
    require(points_per_decade >= 1, "--points-per-decade", "must be >= 1");
    // every flight covers at least r0, so this bounds the hits per walker
    require(velocity * t_max / r0 <= kMaxFlightsPerWalker, "--v",
            "v * t-max / r0 must not exceed 1e9 (flights per walker)");
  }

  void echo_into(Echo& echo) const {
    echo.real("r0", r0);
    echo.real("v", velocity);
    echo.real("t-max", t_max);
    echo.uint("n-env", environments);
    echo.uint("n-walkers", walkers);
    echo.uint("seed", seed);
    echo.uint("points-per-decade", points_per_decade);
  }

  [[nodiscard]] WalkConfig config(const Common& common) const {
    WalkConfig cfg;
    cfg.velocity = velocity;
    cfg.t_max = t_max;
    const auto count = static_cast<std::size_t>(std::ceil(static_cast<double>(points_per_decade) * std::log10(t_max))) + 1;
    cfg.sample_times = geometric_grid(1.0, t_max, count);
    cfg.environments = environments;
    cfg.walkers_per_environment = walkers;
    cfg.seed = seed;
    cfg.threads = common.threads;
    cfg.budget = common.budget();
    return cfg;
  }
};

void require_beta(double beta) {
  require(std::isfinite(beta) && beta > 0.0 && beta <= 100.0, "--beta", "must lie in (0, 100], got " + format_real(beta));
}

struct LevyArgs {
  Common common;
  WalkArgs walk;
  double beta = 0.0;
  std::vector<double> p{2.0};
};

int cmd_levy(const LevyArgs& a, std::ostream& out) {
  require_beta(a.beta);
  a.walk.check();
  require(!a.p.empty(), "--p", "needs at least one order");
  for (double p : a.p) require(std::isfinite(p) && p > 0.0, "--p", "orders must be positive");
  Echo echo("levy");
  echo.real("beta", a.beta);
  a.walk.echo_into(echo);
  echo.list("p", a.p);

  const auto res = run_levy_ensemble(a.walk.config(a.common), a.beta, a.walk.r0, a.p);

  std::ostringstream moments_csv;
  moments_csv << 't';
  for (double p : a.p) moments_csv << ",moment_p" << format_real(p);
  moments_csv << '\n';
  for (std::size_t k = 0; k < res.times.size(); ++k) {
    moments_csv << format_real(res.times[k]);
    for (std::size_t q = 0; q < a.p.size(); ++q) moments_csv << ',' << format_real(res.moments[q][k]);
    moments_csv << '\n';
  }
  std::ostringstream visited_csv;
  {
    CsvWriter csv(visited_csv, {"t", "n_visited"});
    for (std::size_t k = 0; k < res.times.size(); ++k) csv.row(res.times[k], res.mean_visited[k]);
  }
  RunOutputs files(a.common.out_dir);
  files.write("levy_moments.csv", moments_csv.str());
  files.write("levy_visited.csv", visited_csv.str());
  files.manifest(echo, {a.walk.seed}, a.common.threads);
  out << "wrote levy_moments.csv, levy_visited.csv to " << files.dir().string() << '\n';
  return kExitOk;
}

struct CompareArgs {
  Common common;
  WalkArgs walk;
  double beta = 0.0;
  std::vector<unsigned> p{2};
  std::uint64_t slicer_steps = 100000;
};

json report_json(const ComparisonReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"p", row.p},
                    {"slicer_theory", row.slicer_theory},
                    {"slicer_fitted", row.slicer_fitted},
                    {"levy_theory", row.levy_theory ? json(*row.levy_theory) : json(nullptr)},
                    {"levy_fitted", row.levy_fitted},
                    {"fitted_delta", row.fitted_delta},
                    {"theory_delta", row.theory_delta ? json(*row.theory_delta) : json(nullptr)},
                    {"flagged", row.flagged}});
  }
  return {{"beta", r.beta}, {"alpha", r.alpha}, {"threshold", r.threshold}, {"rows", rows}};
}

int cmd_compare(const CompareArgs& a, std::ostream& out) {
  require_beta(a.beta);
  a.walk.check();
  require(!a.p.empty(), "--p", "needs at least one order");
  for (unsigned p : a.p) require(p >= 2 && p <= 64 && p % 2 == 0, "--p", "orders must be even integers in [2, 64]");
  require(a.slicer_steps >= 10 && a.slicer_steps <= kMaxClosedFormSteps, "--slicer-steps", "must lie in [10, 1e8]");
  Echo echo("compare");
  echo.real("beta", a.beta);
  a.walk.echo_into(echo);
  echo.list("p", a.p);
  echo.uint("slicer-steps", a.slicer_steps);

  ComparisonBudget budget;
  budget.slicer_steps = a.slicer_steps;
  budget.points_per_decade = a.walk.points_per_decade;
  budget.walk = a.walk.config(a.common);
  budget.r0 = a.walk.r0;
  const std::vector<double> orders(a.p.begin(), a.p.end());
  const auto report = compare_slicer_levy(a.beta, orders, budget);

  std::ostringstream table;
  write_comparison_table(table, report);
  RunOutputs files(a.common.out_dir);
  files.write("compare_report.json", report_json(report).dump(2) + "\n");
  files.write("compare_report.txt", table.str());
  files.manifest(echo, {a.walk.seed}, a.common.threads);
  out << table.str();
  return kExitOk;
}

// --------------------------------------------------------------------- verify

struct VerifyArgs {
  std::uint64_t n_max = 200;
  std::vector<double> alphas{1.0 / 3.0, 0.5, 1.0, 1.5, 2.0};
};

constexpr double kVerifyEntryTolerance = 1e-13;
constexpr double kVerifyTotalTolerance = 1e-12;

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  require(a.n_max >= 1 && a.n_max <= 5000, "--n-max", "must lie in [1, 5000]");
  require(!a.alphas.empty(), "--alpha", "needs at least one value");
  for (double alpha : a.alphas) require_alpha(alpha);
  bool all_ok = true;
  for (double alpha : a.alphas) {
    const SlicerFamily family(alpha);
    auto occ = uniform_initial();
    double worst_entry = 0.0;
    double worst_total = 0.0;
    for (std::uint64_t n = 1; n <= a.n_max; ++n) {
      occ = evolve_occupancy(family, occ);
      const auto exact = areas(occ);
      const auto closed = coarse_distribution(alpha, n);
      CompensatedSum<double> total;
      for (const auto& [cell, area] : exact) {
        worst_entry = std::max(worst_entry, std::abs(area - closed.mass(cell)));
        total.add(area);
      }
      for (CellIndex j : closed.support()) {
        if (!exact.contains(j)) worst_entry = std::max(worst_entry, closed.mass(j));
      }
      worst_total = std::max(worst_total, std::abs(total.value() - 1.0));
    }
    const bool ok = worst_entry <= kVerifyEntryTolerance && worst_total <= kVerifyTotalTolerance;
    all_ok = all_ok && ok;
    out << "alpha=" << format_real(alpha) << " n<=" << a.n_max << " max_entry_error=" << format_real(worst_entry)
        << " max_total_error=" << format_real(worst_total) << ' ' << (ok ? "PASS" : "FAIL") << '\n';
  }
  return all_ok ? kExitOk : kExitMismatch;
}

// --------------------------------------------------------------------- replay

struct ReplayArgs {
  std::string manifest;
  std::string out_dir;
  unsigned threads = 0;
};

int cmd_replay(const ReplayArgs& a, std::ostream& out, std::ostream& err) {
  std::ifstream in(a.manifest);
  require(static_cast<bool>(in), "manifest", "cannot open " + a.manifest);
  json m;
  try {
    m = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("manifest: " + std::string(e.what()));
  }
  require(m.contains("argv") && m["argv"].is_array() && !m["argv"].empty(), "manifest", "has no argv");
  require(m.contains("outputs") && m["outputs"].is_array(), "manifest", "has no outputs");
  auto args = m["argv"].get<std::vector<std::string>>();
  require(args.front() != "replay" && args.front() != "verify", "manifest", "names a command without outputs");

  const fs::path dir = a.out_dir.empty() ? fs::path(a.manifest).parent_path() / "replay" : fs::path(a.out_dir);
  args.insert(args.end(), {"--out", dir.string()});
  if (args.front() == "mc" || args.front() == "levy" || args.front() == "compare") {
    args.insert(args.end(), {"--threads", std::to_string(a.threads)});
  }
  std::ostringstream inner;
  if (const int rc = run(args, inner, err); rc != kExitOk) return rc;

  bool ok = true;
  for (const auto& entry : m["outputs"]) {
    const auto file = entry.at("file").get<std::string>();
    const auto want = entry.at("sha256").get<std::string>();
    const auto got = sha256_file(dir / file);
    const bool same = got == want;
    ok = ok && same;
    out << (same ? "match    " : "MISMATCH ") << file << ' ' << got << '\n';
  }
  return ok ? kExitOk : kExitMismatch;
}

// --------------------------------------------------------------------- config

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(),
                      [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

/// Expands `--config FILE` into flags for every key the command line does
/// not already set. Keys are long option names without dashes.
std::vector<std::string> expand_config(CLI::App& app, std::vector<std::string> args) {
  if (args.empty()) return args;
  CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(args.front());
  } catch (const CLI::OptionNotFound&) {
    return args;
  }
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  require(static_cast<bool>(in), "--config", "cannot open " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, "--config", path + ":" + std::to_string(line_no) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    require(key != "config", "--config", "config files cannot nest");
    const std::string flag = "--" + key;
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    require(opt != nullptr, "--config", path + ": unknown key '" + key + "' for " + args.front());
    if (has_flag(args, flag)) continue;
    if (opt->get_expected_max() == 0) {
      require(value == "true" || value == "false" || value == "1" || value == "0", "--config",
              key + " takes true or false");
      if (value == "true" || value == "1") args.push_back(flag);
    } else {
      args.push_back(flag);
      args.push_back(value);
    }
  }
  return args;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Slicer map lattice and quenched Levy walk toolkit", "slicer"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  DistArgs dist;
  auto* dist_cmd = app.add_subcommand("slicer-dist", "Exact coarse-grained distribution after n steps");
  dist.common.attach(dist_cmd, false);
  dist_cmd->add_option("--alpha", dist.alpha, "Slicer exponent in (0, 2]")->required();
  dist_cmd->add_option("--n", dist.n, "Number of steps")->required();
  dist_cmd->add_flag("--tail", dist.tail, "Add the asymptotic tail overlay column");
  dist_cmd->add_option("--tail-constant", dist.tail_constant, "Tail amplitude (default 2 alpha); implies --tail");
  dist_cmd->add_option("--format", dist.format, "csv or json");

  MomentsArgs msd;
  msd.p = {2};
  auto* msd_cmd = app.add_subcommand("slicer-msd", "Exact mean squared displacement on a time grid");
  msd.common.attach(msd_cmd, false);
  msd_cmd->add_option("--alpha", msd.alpha, "Slicer exponent in (0, 2]")->required();
  msd_cmd->add_option("--n-max", msd.n_max, "Final step")->required();
  msd_cmd->add_option("--points-per-decade", msd.points_per_decade, "Grid density, 0 = every step");

  MomentsArgs mom;
  auto* mom_cmd = app.add_subcommand("slicer-moments", "Exact moments of the displacement on a time grid");
  mom.common.attach(mom_cmd, false);
  mom_cmd->add_option("--alpha", mom.alpha, "Slicer exponent in (0, 2]")->required();
  mom_cmd->add_option("--n-max", mom.n_max, "Final step")->required();
  mom_cmd->add_option("--p", mom.p, "Moment orders, comma separated")->delimiter(',');
  mom_cmd->add_option("--points-per-decade", mom.points_per_decade, "Grid density, 0 = every step");
  mom_cmd->add_option("--format", mom.format, "csv or json");

  McArgs mc;
  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo ensemble of the slicer map");
  mc.common.attach(mc_cmd, true);
  mc_cmd->add_option("--alpha", mc.alpha, "Slicer exponent in (0, 2]")->required();
  mc_cmd->add_option("--N", mc.particles, "Number of particles")->required();
  mc_cmd->add_option("--n", mc.steps, "Number of steps")->required();
  mc_cmd->add_option("--seed", mc.seed, "Master seed");
  mc_cmd->add_option("--points-per-decade", mc.points_per_decade, "Sample times per decade");
  mc_cmd->add_option("--p", mc.p, "Moment orders, comma separated")->delimiter(',');
  mc_cmd->add_flag("--mirror", mc.mirror, "Start particles at 1 - x");

  LevyArgs levy;
  auto* levy_cmd = app.add_subcommand("levy", "Quenched Levy walk ensemble");
  levy.common.attach(levy_cmd, true);
  levy_cmd->add_option("--beta", levy.beta, "Gap tail exponent")->required();
  levy.walk.attach(levy_cmd);
  levy_cmd->add_option("--p", levy.p, "Moment orders, comma separated")->delimiter(',');

  CompareArgs cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "Fitted moment exponents of the slicer and the matched walk");
  cmp.common.attach(cmp_cmd, true);
  cmp_cmd->add_option("--beta", cmp.beta, "Gap tail exponent")->required();
  cmp.walk.attach(cmp_cmd);
  cmp_cmd->add_option("--p", cmp.p, "Even moment orders, comma separated")->delimiter(',');
  cmp_cmd->add_option("--slicer-steps", cmp.slicer_steps, "Final step of the exact slicer series");

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "Interval-exact areas against the closed form");
  verify_cmd->add_option("--n-max", verify.n_max, "Check every n up to this");
  verify_cmd->add_option("--alpha", verify.alphas, "Exponents, comma separated")->delimiter(',');

  ReplayArgs replay;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a manifest and compare output digests");
  replay_cmd->add_option("manifest", replay.manifest, "Path to a *.manifest.json")->required();
  replay_cmd->add_option("--out", replay.out_dir, "Output directory (default: replay/ next to the manifest)");
  replay_cmd->add_option("--threads", replay.threads, "Worker cap for the re-run");

  try {
    auto expanded = expand_config(app, args);
    std::reverse(expanded.begin(), expanded.end());
    app.parse(expanded);

    if (dist_cmd->parsed()) return cmd_slicer_dist(dist, out);
    if (msd_cmd->parsed()) return cmd_slicer_msd(msd, out);
    if (mom_cmd->parsed()) return cmd_slicer_moments(mom, out);
    if (mc_cmd->parsed()) return cmd_mc(mc, out);
    if (levy_cmd->parsed()) return cmd_levy(levy, out);
    if (cmp_cmd->parsed()) return cmd_compare(cmp, out);
    if (verify_cmd->parsed()) return cmd_verify(verify, out);
    if (replay_cmd->parsed()) return cmd_replay(replay, out, err);
    return kExitUsage;
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const BudgetExceeded& e) {
    err << "error: " << e.what() << " (raise --max-seconds)\n";
    return kExitBudget;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitMismatch;
  }
}

}  // namespace slicer::cli
