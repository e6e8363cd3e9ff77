#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace spde4 {

/// Errors recorded against a varied discretization parameter.
struct ConvergenceStudy {
  std::string parameter;          // "dt", "dx", "dtau" or "h"
  std::string fixed;              // free-form description of the fixed knobs
  std::vector<double> resolutions;
  std::vector<double> errors;     // root (not squared) errors
};

struct RateReport {
  double slope = 0.0;
  double intercept = 0.0;
  /// Root-mean-square residual of the log-log fit.
  double residual = 0.0;
  /// Largest slope change when one point is left out.
  double leave_one_out_spread = 0.0;
  /// The coarsest point was dropped by the pre-asymptotic guard.
  bool coarsest_excluded = false;
  double theory = 0.0;
  double slack = 0.0;
  bool pass = false;
};

/// Least-squares slope of log(error) against log(resolution). When dropping
/// the coarsest point moves the slope by more than 0.1 and at least three
/// points remain, that point is excluded and the exclusion is reported.
/// pass <=> slope >= theory - slack.
RateReport fit_rate(const ConvergenceStudy& study, double theory = 0.0, double slack = 0.15);

/// Plain least-squares slope and intercept of log(y) against log(x).
std::pair<double, double> loglog_fit(std::span<const double> x, std::span<const double> y);

/// Spatial exponent of the stochastic schemes: (4-d)/3 for r = 2 and
/// (4-d)/2 for r = 3, 4.
double nu(int r, int d);
/// Deterministic semidiscrete exponent: 2 theta, 4 theta, 5 theta for
/// r = 2, 3, 4.
double nu_tilde(int r, double theta);
/// Regularity index paired with nu_tilde: 3 theta - 2, 4 theta - 2,
/// 5 theta - 2.
double xi_tilde(int r, double theta);

struct BootstrapInterval {
  double estimate = 0.0;
  double sigma = 0.0;  // standard deviation of the bootstrap replicates
  double low = 0.0;    // 2.5% percentile
  double high = 0.0;   // 97.5% percentile
};

/// Nonparametric bootstrap over `replicates` units. `statistic` receives
/// resampled replicate indices; the estimate uses the identity sample.
BootstrapInterval bootstrap(std::size_t replicates,
                            const std::function<double(std::span<const std::size_t>)>& statistic,
                            int resamples, std::uint64_t seed);

/// Bootstrap of the mean of replicate-level values.
BootstrapInterval bootstrap_mean(std::span<const double> values, int resamples, std::uint64_t seed);

}  // namespace spde4
