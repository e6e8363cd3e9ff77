#pragma once

// Exact (Ito isometry) and Monte Carlo evaluation of the error quantities of
// the regularised problem and its discretizations. All evaluators return
// squared moments E||.||^2; square roots are taken only when fitting rates.
//
// Exact evaluators use that every scheme is linear in the cell integrals
// R^{n,mu}: the squared error equals dt dx^d times the sum of squared
// responses to unit cell inputs. The responses factor into a spatial part
// (retained_fraction) and a time part, so each mode costs O(N_star) or less.

#include <cstdint>
#include <vector>

#include "spde4/fem.hpp"
#include "spde4/noise.hpp"
#include "spde4/oracle.hpp"
#include "spde4/rates.hpp"
#include "spde4/spectral.hpp"

namespace spde4 {

enum class ErrorModeTag { exact_covariance, monte_carlo };

struct ErrorMode {
  ErrorModeTag tag = ErrorModeTag::exact_covariance;
  int replicates = 0;
  int bootstrap_resamples = 1000;
};

/// Monte Carlo knobs shared by the sampled evaluators.
struct McOptions {
  int replicates = 200;
  std::uint64_t master_seed = 20240601;
  int bootstrap_resamples = 1000;
  /// Test hook: every realization is identically zero.
  bool zero_noise = false;
  /// Replicate worker threads; 0 picks the hardware concurrency. Results do
  /// not depend on this value.
  int workers = 0;
};

/// Fraction of the computed value the spectral tail majorant may reach.
inline constexpr double kTailTolerance = 0.01;

/// E||u(t) - u-hat(t)||^2: per mode the variance of the exact stochastic
/// convolution minus the variance retained by the cell projection.
double modeling_error_exact(const NoiseGrid& grid, double t, const SpectralCutoff& cutoff);

/// E||u-hat(t)||^2 = dt dx^d sum of squared unit responses.
double uhat_second_moment_exact(const NoiseGrid& grid, double t, const SpectralCutoff& cutoff);

/// E||U^m - u-hat(tau_m)||^2 for a uniform partition.
double timedisc_error_exact(const NoiseGrid& grid, const TimePartition& partition, int m,
                            const SpectralCutoff& cutoff);
/// Same for every m = 0..M.
std::vector<double> timedisc_error_exact_all(const NoiseGrid& grid, const TimePartition& partition,
                                             const SpectralCutoff& cutoff);

/// E||int_{Delta_m} [u-hat(tau_m) - u-hat(tau)] dtau||^2, the second moment of
/// T_B sigma_m. The tau integral is done by Gauss quadrature on the pieces of
/// Delta_m cut by the noise nodes; refuses unless doubling the points changes
/// the result by less than 1e-10 relative.
double consistency_sigma(const NoiseGrid& grid, const TimePartition& partition, int m,
                         const SpectralCutoff& cutoff, int time_points = 8);

struct McEstimate {
  double mean = 0.0;
  double sigma = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Sampled second moment of u-hat(t) (cross-check of the Ito isometry).
McEstimate uhat_second_moment_mc(const NoiseGrid& grid, double t, const SpectralCutoff& cutoff,
                                 const McOptions& options);

struct PathErrorMoments {
  /// E||error(tau_m)||^2, m = 0..M (or one entry per requested time).
  std::vector<McEstimate> per_step;
  /// sum_m k_m E||error(tau_m)||^2.
  McEstimate l2t;
  /// max_m E||error(tau_m)||^2.
  McEstimate linf;
  int replicates = 0;
};

/// Fully-discrete FEM path against u-hat on common noise.
PathErrorMoments fulldisc_error_mc(const NoiseGrid& grid, const FemDiscretization& disc,
                                   const TimePartition& partition, const SpectralCutoff& cutoff,
                                   const McOptions& options);

/// Fully-discrete FEM path against the spectral Backward Euler iterates on
/// common noise (uniform partition).
PathErrorMoments timedisc_vs_fulldisc_mc(const NoiseGrid& grid, const FemDiscretization& disc,
                                         const TimePartition& partition,
                                         const SpectralCutoff& cutoff, const McOptions& options);

/// Semidiscrete FEM solution (exact in time through discrete eigenpairs)
/// against u-hat at the given times. l2t is unused (zero).
PathErrorMoments semidiscrete_error_mc(const NoiseGrid& grid, const FemDiscretization& disc,
                                       const std::vector<double>& times,
                                       const SpectralCutoff& cutoff, const McOptions& options);

/// Deterministic FEM convergence for one degree over a sweep of element
/// counts: semidiscrete (w_h vs w, L2 in time by Gauss quadrature) and fully
/// discrete (W_h^m vs W^m, discrete L2 in time).
struct DetFemStudy {
  ConvergenceStudy semidiscrete;
  ConvergenceStudy fully_discrete;
  RateReport semidiscrete_rate;
  RateReport fully_discrete_rate;
};
DetFemStudy det_fem_study(const SpectralField& w0, int degree, const std::vector<int>& elements,
                          const TimePartition& partition, double slack = 0.5);

/// Throws GuardRefusal when tail > kTailTolerance * value.
void check_spectral_tail(double value, double tail, const char* what);

}  // namespace spde4
