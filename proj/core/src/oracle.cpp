#include "spde4/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "spde4/errors.hpp"
#include "spde4/summation.hpp"

namespace spde4 {

namespace {

// integral over (a, b) of exp(-L (t - s)) ds for a <= b <= t.
double exp_window(double L, double a, double b, double t) {
  if (b <= a) return 0.0;
  if (L == 0.0) return b - a;
  return std::exp(-L * (t - b)) * (-std::expm1(-L * (b - a))) / L;
}

void check_time(const NoiseGrid& grid, double t) {
  if (!(t >= 0.0 && t <= grid.T)) throw ValidationError("time outside [0, T]");
}

void check_partition(const NoiseGrid& grid, const TimePartition& partition) {
  if (std::abs(partition.final_time() - grid.T) > 1e-12 * grid.T) {
    throw ValidationError("time partition does not end at the noise grid final time");
  }
}

void check_cutoff(const NoiseGrid& grid, const SpectralCutoff& cutoff) {
  cutoff.validate();
  if (cutoff.d != grid.d) throw ValidationError("cutoff dimension does not match the noise grid");
}

}  // namespace

TimePartition::TimePartition(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 2) throw ValidationError("time partition needs at least one step");
  if (nodes_.front() != 0.0) throw ValidationError("time partition must start at 0");
  for (std::size_t m = 1; m < nodes_.size(); ++m) {
    if (!(nodes_[m] > nodes_[m - 1])) throw ValidationError("time partition nodes must increase strictly");
  }
  const double k0 = nodes_[1] - nodes_[0];
  uniform_ = true;
  for (std::size_t m = 1; m < nodes_.size(); ++m) {
    if (std::abs((nodes_[m] - nodes_[m - 1]) - k0) > 1e-12 * k0) uniform_ = false;
  }
}

TimePartition TimePartition::uniform(double T, int steps) {
  if (steps < 1 || !(T > 0.0)) throw ValidationError("uniform partition needs T > 0 and at least one step");
  std::vector<double> nodes(static_cast<std::size_t>(steps) + 1);
  for (int m = 0; m <= steps; ++m) nodes[static_cast<std::size_t>(m)] = T * m / steps;
  nodes.back() = T;
  return TimePartition(std::move(nodes));
}

double TimePartition::k_max() const {
  double k = 0.0;
  for (int m = 1; m <= steps(); ++m) k = std::max(k, step(m));
  return k;
}

double exp_cell_response(double L, double lo, double hi, double t) {
  if (t <= lo) return 0.0;
  return exp_window(L, lo, std::min(t, hi), t);
}

double overlap_length(double a, double b, double c, double d) {
  return std::max(0.0, std::min(b, d) - std::max(a, c));
}

std::vector<std::vector<std::pair<std::int64_t, double>>> step_overlaps(const NoiseGrid& grid,
                                                                       const TimePartition& partition) {
  grid.validate();
  check_partition(grid, partition);
  const double dt = grid.dt();
  std::vector<std::vector<std::pair<std::int64_t, double>>> out(static_cast<std::size_t>(partition.steps()));
  for (int m = 1; m <= partition.steps(); ++m) {
    const double a = partition.node(m - 1);
    const double b = partition.node(m);
    auto first = static_cast<std::int64_t>(std::floor(a / dt)) - 1;
    auto last = static_cast<std::int64_t>(std::ceil(b / dt)) + 1;
    first = std::max<std::int64_t>(first, 0);
    last = std::min<std::int64_t>(last, grid.n_time - 1);
    for (std::int64_t n = first; n <= last; ++n) {
      const double o = overlap_length(a, b, grid.t_node(n), grid.t_node(n + 1));
      // Drop slivers produced by rounding of nodes that coincide.
      if (o > 1e-13 * grid.T) out[static_cast<std::size_t>(m - 1)].emplace_back(n, o);
    }
  }
  return out;
}

std::vector<double> retained_fraction_1d(const NoiseGrid& grid, int n_max) {
  grid.validate();
  std::vector<double> f(static_cast<std::size_t>(n_max));
  for (int a = 1; a <= n_max; ++a) {
    PairwiseAccumulator acc;
    for (std::int64_t j = 1; j <= grid.j_space; ++j) {
      const double b = cell_integral_1d(a, j, grid.j_space);
      acc.add(b * b);
    }
    f[static_cast<std::size_t>(a - 1)] = acc.total() / grid.dx();
  }
  return f;
}

double retained_fraction(const NoiseGrid& grid, const MultiIndex& alpha) {
  double f = 1.0;
  for (int i = 0; i < alpha.dim(); ++i) {
    f *= retained_fraction_1d(grid, alpha[i]).back();
  }
  return f;
}

SpectralField uhat_coeffs(const NoiseRealization& r, double t, const SpectralCutoff& cutoff) {
  const NoiseGrid& grid = r.grid();
  check_time(grid, t);
  check_cutoff(grid, cutoff);
  const std::vector<SpectralField> what = noise_spectral_coeffs(r, cutoff);
  SpectralField out(cutoff);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double lambda = eigenvalue(cutoff.index_at(k));
    const double L = lambda * lambda;
    PairwiseAccumulator acc;
    for (std::int64_t n = 0; n < grid.n_time && grid.t_node(n) < t; ++n) {
      acc.add(what[static_cast<std::size_t>(n)][k] * exp_cell_response(L, grid.t_node(n), grid.t_node(n + 1), t));
    }
    out[k] = acc.total();
  }
  return out;
}

SpectralPath uhat_path(const NoiseRealization& r, const std::vector<double>& times,
                       const SpectralCutoff& cutoff) {
  const NoiseGrid& grid = r.grid();
  check_cutoff(grid, cutoff);
  for (std::size_t i = 0; i < times.size(); ++i) {
    check_time(grid, times[i]);
    if (i > 0 && times[i] < times[i - 1]) throw ValidationError("uhat_path: times must be nondecreasing");
  }
  const std::vector<SpectralField> what = noise_spectral_coeffs(r, cutoff);
  const std::vector<double> lambdas = eigenvalues(cutoff);

  SpectralPath path;
  path.times = times;
  path.provenance = {r.seed().master_seed, r.seed().replicate_id, "u-hat (exact spectral)"};
  SpectralField current(cutoff);
  double t_prev = 0.0;
  for (double t : times) {
    SpectralField next(cutoff);
    const auto n_first = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(t_prev / grid.dt())) - 1);
    for (std::size_t k = 0; k < next.size(); ++k) {
      const double L = lambdas[k] * lambdas[k];
      double v = std::exp(-L * (t - t_prev)) * current[k];
      for (std::int64_t n = n_first; n < grid.n_time && grid.t_node(n) < t; ++n) {
        const double a = std::max(grid.t_node(n), t_prev);
        const double b = std::min(grid.t_node(n + 1), t);
        v += what[static_cast<std::size_t>(n)][k] * exp_window(L, a, b, t);
      }
      next[k] = v;
    }
    current = std::move(next);
    path.states.push_back(current);
    t_prev = t;
  }
  return path;
}

namespace {

// g_m = integral over Delta_m of the noise coefficients, per step.
std::vector<SpectralField> step_forcing(const NoiseRealization& r, const TimePartition& partition,
                                        const SpectralCutoff& cutoff) {
  const auto overlaps = step_overlaps(r.grid(), partition);
  const std::vector<SpectralField> what = noise_spectral_coeffs(r, cutoff);
  std::vector<SpectralField> g;
  g.reserve(overlaps.size());
  for (const auto& list : overlaps) {
    SpectralField s(cutoff);
    for (const auto& [n, o] : list) {
      const SpectralField& w = what[static_cast<std::size_t>(n)];
      for (std::size_t k = 0; k < s.size(); ++k) s[k] += o * w[k];
    }
    g.push_back(std::move(s));
  }
  return g;
}

}  // namespace

SpectralPath timediscrete_recursion(const NoiseRealization& r, const TimePartition& partition,
                                    const SpectralCutoff& cutoff) {
  check_cutoff(r.grid(), cutoff);
  const std::vector<SpectralField> g = step_forcing(r, partition, cutoff);
  const std::vector<double> lambdas = eigenvalues(cutoff);
  SpectralPath path;
  path.times = partition.nodes();
  path.provenance = {r.seed().master_seed, r.seed().replicate_id, "Backward Euler (recursion)"};
  path.nonuniform = !partition.is_uniform();
  SpectralField current(cutoff);
  path.states.push_back(current);
  for (int m = 1; m <= partition.steps(); ++m) {
    const double k = partition.step(m);
    const SpectralField& gm = g[static_cast<std::size_t>(m - 1)];
    for (std::size_t i = 0; i < current.size(); ++i) {
      current[i] = (current[i] + gm[i]) / (1.0 + k * lambdas[i] * lambdas[i]);
    }
    path.states.push_back(current);
  }
  return path;
}

SpectralPath timediscrete_coeffs(const NoiseRealization& r, const TimePartition& partition,
                                 const SpectralCutoff& cutoff) {
  if (!partition.is_uniform()) return timediscrete_recursion(r, partition, cutoff);
  check_cutoff(r.grid(), cutoff);
  const std::vector<SpectralField> g = step_forcing(r, partition, cutoff);
  const std::vector<double> lambdas = eigenvalues(cutoff);
  const double dtau = partition.step(1);
  const int M = partition.steps();
  SpectralPath path;
  path.times = partition.nodes();
  path.provenance = {r.seed().master_seed, r.seed().replicate_id, "Backward Euler (resolvent powers)"};
  path.states.assign(static_cast<std::size_t>(M) + 1, SpectralField(cutoff));
  std::vector<double> powers(static_cast<std::size_t>(M) + 1);
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const double rho = 1.0 / (1.0 + dtau * lambdas[i] * lambdas[i]);
    powers[0] = 1.0;
    for (int p = 1; p <= M; ++p) powers[static_cast<std::size_t>(p)] = powers[static_cast<std::size_t>(p - 1)] * rho;
    for (int m = 1; m <= M; ++m) {
      double v = 0.0;
      for (int j = 1; j <= m; ++j) v += powers[static_cast<std::size_t>(m - j + 1)] * g[static_cast<std::size_t>(j - 1)][i];
      path.states[static_cast<std::size_t>(m)][i] = v;
    }
  }
  return path;
}

SpectralField deterministic_exact(const SpectralField& w0, double t) { return semigroup_apply(w0, t); }

SpectralPath deterministic_be(const SpectralField& w0, const TimePartition& partition) {
  SpectralPath path;
  path.times = partition.nodes();
  path.provenance.description = "deterministic Backward Euler";
  path.nonuniform = !partition.is_uniform();
  SpectralField current = w0;
  path.states.push_back(current);
  for (int m = 1; m <= partition.steps(); ++m) {
    current = resolvent_apply(current, partition.step(m));
    path.states.push_back(current);
  }
  return path;
}

double holder_moment_exact(const NoiseGrid& grid, double tau_a, double tau_b, const SpectralCutoff& cutoff) {
  check_cutoff(grid, cutoff);
  check_time(grid, tau_a);
  check_time(grid, tau_b);
  if (tau_a > tau_b) throw ValidationError("holder_moment_exact: need tau_a <= tau_b");
  if (tau_a == tau_b) return 0.0;
  const std::vector<double> f1 = retained_fraction_1d(grid, cutoff.n_max);
  PairwiseAccumulator total;
  for (std::size_t k = 0; k < cutoff.size(); ++k) {
    const MultiIndex alpha = cutoff.index_at(k);
    const double lambda = eigenvalue(alpha);
    const double L = lambda * lambda;
    double spatial = 1.0;
    for (int i = 0; i < grid.d; ++i) spatial *= f1[static_cast<std::size_t>(alpha[i] - 1)];
    PairwiseAccumulator time_part;
    for (std::int64_t n = 0; n < grid.n_time && grid.t_node(n) < tau_b; ++n) {
      const double lo = grid.t_node(n);
      const double hi = grid.t_node(n + 1);
      const double diff = exp_cell_response(L, lo, hi, tau_b) - exp_cell_response(L, lo, hi, tau_a);
      time_part.add(diff * diff);
    }
    total.add(spatial * time_part.total() / grid.dt());
  }
  return total.total();
}

}  // namespace spde4
