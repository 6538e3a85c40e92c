#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "slicer/transport_analysis.hpp"
#include "support/generators.hpp"

using namespace slicer;

namespace {

Series closed_form_series(double alpha, std::uint64_t n_max, unsigned p, std::uint64_t lo = 1) {
  return closed_form_moment_series(alpha, geometric_integer_grid(lo, n_max, 20), p);
}

}  // namespace

TEST(FitPowerLaw, ExactPowerLaw) {
  Series s;
  for (double t : geometric_grid(10.0, 1e4, 61)) s.emplace_back(t, 3.0 * std::pow(t, 1.5));
  const auto fit = fit_power_law(s, FitWindow{10.0, 1e4});
  EXPECT_NEAR(fit.exponent, 1.5, 1e-12);
  EXPECT_NEAR(fit.amplitude, 3.0, 1e-10);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
  EXPECT_EQ(fit.points, 61u);
  const auto tail = fit_power_law(s);
  EXPECT_EQ(tail.window.t_min, 1e3);
  EXPECT_EQ(tail.points, 21u);
}

TEST(FitPowerLawProperty, RecoversSyntheticExponents) {
  slicer::testing::Gen g(41);
  for (int i = 0; i < 500; ++i) {
    const double exponent = g.uniform(-3.0, 6.0);
    const double amplitude = g.uniform(1e-3, 1e3);
    Series s;
    for (double t : geometric_grid(1.0, g.uniform(50.0, 1e7), 40)) s.emplace_back(t, amplitude * std::pow(t, exponent));
    const auto fit = fit_power_law(s);
    ASSERT_NEAR(fit.exponent, exponent, 1e-10);
    ASSERT_NEAR(fit.amplitude / amplitude, 1.0, 1e-9);
  }
}

TEST(FitPowerLaw, ClosedFormMoments) {
  EXPECT_NEAR(fit_power_law(closed_form_series(0.5, 100000, 2)).exponent, 1.5, 0.02);
  EXPECT_NEAR(fit_power_law(closed_form_series(1.0 / 3.0, 100000, 4)).exponent, 11.0 / 3.0, 0.05);
}

TEST(FitPowerLaw, RejectsDegenerateInput) {
  EXPECT_THROW((void)fit_power_law({}), std::invalid_argument);
  EXPECT_THROW((void)fit_power_law({{1.0, 1.0}, {2.0, 2.0}}, FitWindow{1.0, 2.0}), std::invalid_argument);
  EXPECT_THROW((void)fit_power_law({{1.0, 1.0}, {2.0, 0.0}, {3.0, 2.0}}, FitWindow{1.0, 3.0}), std::invalid_argument);
  EXPECT_THROW((void)fit_power_law({{1.0, 1.0}, {1.0, 2.0}, {1.0, 3.0}}, FitWindow{1.0, 1.0}), std::invalid_argument);
}

TEST(FitLogLaw, ExactLogLaw) {
  Series s;
  for (double t : geometric_grid(2.0, 1e6, 50)) s.emplace_back(t, 7.0 * std::log(t));
  const auto fit = fit_log_law(s, FitWindow{2.0, 1e6});
  EXPECT_NEAR(fit.slope, 7.0, 1e-12);
  EXPECT_NEAR(fit.intercept, 0.0, 1e-10);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
}

TEST(FitLogLaw, LogarithmicRegimeOfTheSlicer) {
  const auto s = closed_form_series(2.0, 1000000, 2, 10000);
  const auto log_fit = fit_log_law(s, FitWindow{1e4, 1e6});
  EXPECT_GE(log_fit.r_squared, 0.99);
  EXPECT_GT(log_fit.slope, 0.0);
}

TEST(FitLogLaw, PowerLawDataPrefersPowerLaw) {
  Series s;
  for (double t : geometric_grid(10.0, 1e5, 60)) s.emplace_back(t, std::sqrt(t));
  const FitWindow w{10.0, 1e5};
  EXPECT_LT(fit_log_law(s, w).r_squared, fit_power_law(s, w).r_squared);
}

TEST(EstimateGeneralizedDiffusion, ClosedFormCoefficients) {
  EXPECT_NEAR(estimate_generalized_diffusion(closed_form_series(0.5, 10000, 2), 1.5) / (8.0 / 3.0), 1.0, 0.05);
  EXPECT_NEAR(estimate_generalized_diffusion(closed_form_series(1.0 / 3.0, 100000, 2), 5.0 / 3.0) / 2.4, 1.0, 0.05);
  EXPECT_THROW((void)estimate_generalized_diffusion({}, 1.0), std::invalid_argument);
  EXPECT_THROW((void)estimate_generalized_diffusion({{1.0, 1.0}}, 2.5), std::domain_error);
}

TEST(EstimateGeneralizedDiffusion, TrendsClassifyTheExponent) {
  for (double alpha : {1.0 / 3.0, 0.5, 1.0, 1.5}) {
    const double gamma = 2.0 - alpha;
    const double limit = generalized_diffusion_coefficient(alpha);
    std::vector<double> at, above, below;
    for (std::uint64_t n : {1000u, 10000u, 100000u}) {
      const auto s = closed_form_series(alpha, n, 2);
      at.push_back(std::abs(estimate_generalized_diffusion(s, gamma) - limit));
      above.push_back(estimate_generalized_diffusion(s, gamma + 0.2));
      below.push_back(estimate_generalized_diffusion(s, gamma - 0.2));
    }
    for (std::size_t k = 1; k < at.size(); ++k) {
      EXPECT_LT(at[k], at[k - 1]) << alpha;
      EXPECT_LT(above[k], above[k - 1]) << alpha;
      EXPECT_GT(below[k], below[k - 1]) << alpha;
    }
  }
}

TEST(ExponentIdentity, MomentTableMatchesSlicerOnItsBranch) {
  int checked = 0;
  for (int k = 1; k <= 100; ++k) {
    const double beta = 1.5 * k / 100.0;
    ASSERT_NEAR(predicted_msd_exponent(beta), 2.0 - alpha_from_beta(beta), 1e-12) << beta;
    for (double p : {2.0, 4.0, 6.0}) {
      if (beta == 1.0 || !(p > std::max(beta, 2.0 * beta - 1.0))) continue;
      const auto walk = predicted_moment_exponent(beta, p);
      ASSERT_TRUE(walk.has_value()) << beta << ' ' << p;
      ASSERT_NEAR(*walk, p - alpha_from_beta(beta), 1e-12) << beta << ' ' << p;
      ++checked;
    }
  }
  EXPECT_EQ(checked, 299);
}

TEST(CompareSlicerLevy, TheoryColumns) {
  ComparisonBudget budget;
  budget.walk.t_max = 1e3;
  budget.walk.environments = 10;
  budget.walk.walkers_per_environment = 5;
  budget.slicer_steps = 10000;
  const std::vector<double> orders{2.0, 4.0};
  const auto r = compare_slicer_levy(1.25, orders, budget);
  EXPECT_DOUBLE_EQ(r.alpha, 0.75);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_DOUBLE_EQ(r.rows[0].slicer_theory, 1.25);
  EXPECT_DOUBLE_EQ(*r.rows[0].levy_theory, 1.25);
  EXPECT_DOUBLE_EQ(r.rows[1].slicer_theory, 3.25);
  EXPECT_DOUBLE_EQ(*r.rows[1].levy_theory, 3.25);
  EXPECT_DOUBLE_EQ(*r.rows[1].theory_delta, 0.0);
  const std::vector<double> odd{3.0};
  EXPECT_THROW((void)compare_slicer_levy(1.25, odd, budget), std::invalid_argument);
}

TEST(CompareSlicerLevy, SuperdiffusiveBranchAgrees) {
  const std::vector<double> orders{2.0};
  const auto r = compare_slicer_levy(0.5, orders, ComparisonBudget{});
  EXPECT_NEAR(r.alpha, 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(r.rows[0].slicer_theory, 11.0 / 6.0, 1e-15);
  EXPECT_NEAR(*r.rows[0].levy_theory, 11.0 / 6.0, 1e-15);
  EXPECT_NEAR(r.rows[0].slicer_fitted, 11.0 / 6.0, 0.02);
  EXPECT_LE(r.rows[0].fitted_delta, 0.1);
  EXPECT_FALSE(r.any_flagged());
  std::ostringstream table;
  write_comparison_table(table, r);
  EXPECT_NE(table.str().find("ok"), std::string::npos);
}

TEST(CompareSlicerLevy, DiffusiveBranchAgrees) {
  const std::vector<double> orders{2.0};
  const auto r = compare_slicer_levy(2.0, orders, ComparisonBudget{});
  EXPECT_DOUBLE_EQ(r.alpha, 1.0);
  EXPECT_NEAR(r.rows[0].slicer_fitted, 1.0, 0.1);
  EXPECT_NEAR(r.rows[0].levy_fitted, 1.0, 0.1);
}
