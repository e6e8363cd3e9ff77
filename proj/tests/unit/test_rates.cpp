#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "spde4/errors.hpp"
#include "spde4/rates.hpp"

using namespace spde4;

namespace {

ConvergenceStudy power_law(double p, std::vector<double> h) {
  ConvergenceStudy s;
  s.parameter = "h";
  s.resolutions = h;
  for (double x : h) s.errors.push_back(3.0 * std::pow(x, p));
  return s;
}

}  // namespace

TEST(Rates, ExactPowerLaw) {
  const auto r = fit_rate(power_law(1.5, {0.5, 0.25, 0.125, 0.0625}), 1.5, 0.1);
  EXPECT_NEAR(r.slope, 1.5, 1e-12);
  EXPECT_NEAR(r.intercept, std::log(3.0), 1e-12);
  EXPECT_NEAR(r.residual, 0.0, 1e-12);
  EXPECT_NEAR(r.leave_one_out_spread, 0.0, 1e-12);
  EXPECT_FALSE(r.coarsest_excluded);
  EXPECT_TRUE(r.pass);
}

TEST(Rates, PassIsSlopeAgainstTheoryMinusSlack) {
  const auto s = power_law(0.9, {0.1, 0.05, 0.025});
  EXPECT_TRUE(fit_rate(s, 1.0, 0.15).pass);
  EXPECT_FALSE(fit_rate(s, 1.0, 0.05).pass);
  EXPECT_EQ(fit_rate(s, 1.0, 0.05).theory, 1.0);
}

TEST(Rates, PreAsymptoticCoarsestPointIsDropped) {
  auto s = power_law(2.0, {0.8, 0.4, 0.2, 0.1, 0.05});
  s.errors[0] *= 0.1;  // saturated coarse level
  const auto r = fit_rate(s, 2.0);
  EXPECT_TRUE(r.coarsest_excluded);
  EXPECT_NEAR(r.slope, 2.0, 1e-12);
  // With three points nothing is dropped.
  auto three = power_law(2.0, {0.4, 0.2, 0.1});
  three.errors[0] *= 0.1;
  EXPECT_FALSE(fit_rate(three, 2.0).coarsest_excluded);
}

TEST(Rates, RejectsBadStudies) {
  EXPECT_THROW(fit_rate(power_law(1.0, {0.1, 0.05})), ValidationError);
  auto s = power_law(1.0, {0.1, 0.05, 0.025});
  s.errors[1] = 0.0;
  EXPECT_THROW(fit_rate(s), ValidationError);
}

TEST(Rates, TheoryExponents) {
  EXPECT_DOUBLE_EQ(nu(2, 2), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(nu(3, 2), 1.0);
  EXPECT_DOUBLE_EQ(nu(4, 3), 0.5);
  EXPECT_DOUBLE_EQ(nu_tilde(2, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(nu_tilde(3, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(nu_tilde(4, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(xi_tilde(2, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(xi_tilde(3, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(xi_tilde(4, 0.5), 0.5);
  EXPECT_THROW(nu(5, 2), ValidationError);
}

TEST(Rates, BootstrapOfConstantHasNoSpread) {
  const std::vector<double> v(50, 2.5);
  const auto b = bootstrap_mean(v, 200, 1);
  EXPECT_DOUBLE_EQ(b.estimate, 2.5);
  EXPECT_DOUBLE_EQ(b.sigma, 0.0);
  EXPECT_DOUBLE_EQ(b.low, 2.5);
  EXPECT_DOUBLE_EQ(b.high, 2.5);
}

TEST(Rates, BootstrapSigmaApproximatesStandardError) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(1.0, 2.0);
  std::vector<double> v(2000);
  for (auto& x : v) x = n(rng);
  const auto a = bootstrap_mean(v, 1000, 7);
  const auto b = bootstrap_mean(v, 1000, 7);
  EXPECT_EQ(a.sigma, b.sigma);
  EXPECT_NEAR(a.sigma, 2.0 / std::sqrt(2000.0), 0.01);
  EXPECT_LT(a.low, a.estimate);
  EXPECT_GT(a.high, a.estimate);
  EXPECT_NEAR(a.high - a.low, 2 * 1.96 * a.sigma, 0.3 * a.sigma);
}
