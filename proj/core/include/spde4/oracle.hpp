#pragma once

// Semi-analytic solutions in the sine eigenbasis: the mild solution u-hat of
// the regularised problem, its Backward Euler iterates, and the deterministic
// problem with exact and Backward Euler time evolution. Every time integral of
// an exponential is evaluated in closed form.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spde4/noise.hpp"
#include "spde4/spectral.hpp"

namespace spde4 {

/// Nodes 0 = tau_0 < ... < tau_M = T.
class TimePartition {
 public:
  explicit TimePartition(std::vector<double> nodes);
  static TimePartition uniform(double T, int steps);

  int steps() const { return static_cast<int>(nodes_.size()) - 1; }
  double final_time() const { return nodes_.back(); }
  double node(int m) const { return nodes_[static_cast<std::size_t>(m)]; }
  /// k_m = tau_m - tau_{m-1}, m = 1..M.
  double step(int m) const { return node(m) - node(m - 1); }
  double k_max() const;
  bool is_uniform() const { return uniform_; }
  const std::vector<double>& nodes() const { return nodes_; }

 private:
  std::vector<double> nodes_;
  bool uniform_ = false;
};

/// Where a path came from.
struct Provenance {
  std::uint64_t master_seed = 0;
  std::uint64_t replicate_id = 0;
  std::string description;
};

/// Time-indexed solution record. State is a SpectralField or a FemFunction.
template <class State>
struct Path {
  std::vector<double> times;
  std::vector<State> states;
  Provenance provenance;
  /// Set when a nonuniform partition forced the recursion form.
  bool nonuniform = false;
};

using SpectralPath = Path<SpectralField>;

/// integral over (lo, min(t, hi)) of exp(-L (t - s)) ds, zero when t <= lo.
double exp_cell_response(double L, double lo, double hi, double t);

/// Length of (a, b) intersected with (c, d).
double overlap_length(double a, double b, double c, double d);

/// Noise slabs overlapping each step: entry m-1 lists (n, |Delta_m cap T_n|).
std::vector<std::vector<std::pair<std::int64_t, double>>> step_overlaps(const NoiseGrid& grid,
                                                                       const TimePartition& partition);

/// sum_mu b_{a,mu}^2 / dx^d, the fraction of e_a retained by the piecewise
/// constant projection on the noise cells.
double retained_fraction(const NoiseGrid& grid, const MultiIndex& alpha);
/// Per-dimension factors sum_j b1(a, j)^2 / dx for a = 1..n_max.
std::vector<double> retained_fraction_1d(const NoiseGrid& grid, int n_max);

/// u-hat(t) in the eigenbasis, 0 <= t <= T.
SpectralField uhat_coeffs(const NoiseRealization& r, double t, const SpectralCutoff& cutoff);

/// u-hat at increasing times, propagated exactly from one time to the next.
SpectralPath uhat_path(const NoiseRealization& r, const std::vector<double>& times,
                       const SpectralCutoff& cutoff);

/// Backward Euler iterates U^0 = 0, ..., U^M. Uniform partitions use the
/// resolvent-power closed form; nonuniform ones fall back to the recursion and
/// set `nonuniform`.
SpectralPath timediscrete_coeffs(const NoiseRealization& r, const TimePartition& partition,
                                 const SpectralCutoff& cutoff);

/// Recursion form U^m = (U^{m-1} + int_{Delta_m} W-hat) / (1 + k_m lambda^2).
SpectralPath timediscrete_recursion(const NoiseRealization& r, const TimePartition& partition,
                                    const SpectralCutoff& cutoff);

/// w(t) = S(t) w0.
SpectralField deterministic_exact(const SpectralField& w0, double t);

/// W^m = W^{m-1} / (1 + k_m lambda^2), W^0 = w0.
SpectralPath deterministic_be(const SpectralField& w0, const TimePartition& partition);

/// Exact E||u-hat(tau_b) - u-hat(tau_a)||^2 over the truncated modes.
double holder_moment_exact(const NoiseGrid& grid, double tau_a, double tau_b,
                           const SpectralCutoff& cutoff);

}  // namespace spde4
