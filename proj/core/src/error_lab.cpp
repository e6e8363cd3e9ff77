#include "spde4/error_lab.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spde4/errors.hpp"
#include "spde4/quadrature.hpp"
#include "spde4/series.hpp"
#include "spde4/summation.hpp"

namespace spde4 {

namespace {

// Modes grouped by |alpha|^2: every time factor depends on alpha only through
// lambda_alpha, while the spatial factor F(alpha) is a product over axes.
struct ModeGroups {
  std::vector<std::int64_t> count;
  std::vector<double> f_sum;
  std::vector<double> f_max;

  std::size_t size() const { return count.size(); }
  double L(std::size_t s) const {
    const double lambda = kPi * kPi * static_cast<double>(s);
    return lambda * lambda;
  }
};

ModeGroups group_modes(const NoiseGrid& grid, const SpectralCutoff& cutoff) {
  cutoff.validate();
  if (cutoff.d != grid.d) throw ValidationError("cutoff dimension does not match the noise grid");
  const std::vector<double> f1 = retained_fraction_1d(grid, cutoff.n_max);
  const int n = cutoff.n_max;
  const auto top = static_cast<std::size_t>(grid.d) * static_cast<std::size_t>(n) * static_cast<std::size_t>(n) + 1;
  ModeGroups g{std::vector<std::int64_t>(top, 0), std::vector<double>(top, 0.0), std::vector<double>(top, 0.0)};
  auto add = [&g](std::size_t s, double f) {
    ++g.count[s];
    g.f_sum[s] += f;
    g.f_max[s] = std::max(g.f_max[s], f);
  };
  const auto sq = [](int a) { return static_cast<std::size_t>(a) * static_cast<std::size_t>(a); };
  if (grid.d == 1) {
    for (int a = 1; a <= n; ++a) add(sq(a), f1[static_cast<std::size_t>(a - 1)]);
    return g;
  }
  // Pairs first; d = 3 then shifts the pair groups by c^2, which keeps the
  // memory access sequential.
  const std::size_t top2 = 2 * sq(n) + 1;
  ModeGroups pairs{std::vector<std::int64_t>(top2, 0), std::vector<double>(top2, 0.0), std::vector<double>(top2, 0.0)};
  for (int a = 1; a <= n; ++a)
    for (int b = 1; b <= n; ++b) {
      const std::size_t s = sq(a) + sq(b);
      const double f = f1[static_cast<std::size_t>(a - 1)] * f1[static_cast<std::size_t>(b - 1)];
      ++pairs.count[s];
      pairs.f_sum[s] += f;
      pairs.f_max[s] = std::max(pairs.f_max[s], f);
    }
  if (grid.d == 2) return pairs;
  std::vector<std::size_t> occupied;
  for (std::size_t s2 = 2; s2 < top2; ++s2)
    if (pairs.count[s2] != 0) occupied.push_back(s2);
  for (int c = 1; c <= n; ++c) {
    const double fc = f1[static_cast<std::size_t>(c - 1)];
    const std::size_t shift = sq(c);
    for (std::size_t s2 : occupied) {
      const std::size_t s = s2 + shift;
      g.count[s] += pairs.count[s2];
      g.f_sum[s] += fc * pairs.f_sum[s2];
      g.f_max[s] = std::max(g.f_max[s], fc * pairs.f_max[s2]);
    }
  }
  return g;
}

// Outside the cutoff box some a_i exceeds n_max, and the retained fraction
// of one axis obeys f1(a) <= 8 J^2 / (pi a)^2, so quantities carrying
// F(alpha) get this extra factor on their tail.
double retained_tail_factor(const NoiseGrid& grid, int n_max) {
  const double J = static_cast<double>(grid.j_space);
  const double a = n_max + 1.0;
  return std::min(1.0, 8.0 * J * J / (kPi * kPi * a * a));
}

void check_time_in(const NoiseGrid& grid, double t) {
  if (!(t > 0.0 && t <= grid.T)) throw ValidationError("time must lie in (0, T]");
}

void require_uniform(const NoiseGrid& grid, const TimePartition& partition) {
  if (!partition.is_uniform()) throw ValidationError("exact time-discrete evaluators need a uniform partition");
  if (std::abs(partition.final_time() - grid.T) > 1e-12 * grid.T) {
    throw ValidationError("time partition does not end at the noise grid final time");
  }
}

// Number of noise slabs starting before t, and the length of the last
// (possibly partial) one.
std::pair<std::int64_t, double> active_slabs(const NoiseGrid& grid, double t) {
  auto n_t = static_cast<std::int64_t>(std::ceil(t / grid.dt()));
  n_t = std::clamp<std::int64_t>(n_t, 1, grid.n_time);
  while (n_t > 1 && grid.t_node(n_t - 1) >= t) --n_t;
  while (n_t < grid.n_time && grid.t_node(n_t) < t) ++n_t;
  return {n_t, t - grid.t_node(n_t - 1)};
}

// sum_n I_n(t)^2 with I_n(t) the integral of exp(-L (t - s)) over slab n
// before t, by the geometric closed form.
double sum_response_squares(double L, double dt, std::int64_t n_t, double partial) {
  const double last = -std::expm1(-L * partial) / L;
  const double full = -std::expm1(-L * dt) / L;
  const double ratio = std::expm1(-2.0 * L * dt * static_cast<double>(n_t - 1)) / std::expm1(-2.0 * L * dt);
  return last * last + full * full * std::exp(-2.0 * L * partial) * ratio;
}

// Integral over (a, b) of f, with a mesh graded geometrically towards a so
// that a boundary layer of width 1/L is resolved.
template <class F>
double graded_integral(const F& f, double a, double b, double L, int points) {
  if (!(b > a)) return 0.0;
  const double len = b - a;
  int levels = 0;
  while (levels < 60 && len * L / std::ldexp(1.0, levels) > 1.0) ++levels;
  const GaussRule& rule = gauss_legendre(points);
  double sum = 0.0;
  double hi = b;
  for (int j = 1; j <= levels + 1; ++j) {
    const double lo = (j == levels + 1) ? a : a + len * std::ldexp(1.0, -j);
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    for (int q = 0; q < rule.size(); ++q) {
      sum += half * rule.weights[static_cast<std::size_t>(q)] * f(mid + half * rule.nodes[static_cast<std::size_t>(q)]);
    }
    hi = lo;
  }
  return sum;
}

}  // namespace

void check_spectral_tail(double value, double tail, const char* what) {
  if (tail > kTailTolerance * value) {
    throw GuardRefusal(std::string(what) + ": spectral tail bound " + std::to_string(tail) + " exceeds " +
                       std::to_string(kTailTolerance) + " of the computed value " + std::to_string(value) +
                       "; raise the cutoff");
  }
}

double modeling_error_exact(const NoiseGrid& grid, double t, const SpectralCutoff& cutoff) {
  grid.validate();
  check_time_in(grid, t);
  const ModeGroups g = group_modes(grid, cutoff);
  const auto [n_t, partial] = active_slabs(grid, t);
  const double dt = grid.dt();
  PairwiseAccumulator total;
  for (std::size_t s = 1; s < g.size(); ++s) {
    if (g.count[s] == 0) continue;
    const double L = g.L(s);
    const double full = -std::expm1(-2.0 * L * t) / (2.0 * L);
    const double kept = sum_response_squares(L, dt, n_t, partial) / dt;
    const double worst = full - g.f_max[s] * kept;
    if (worst < -1e-14) {
      throw SolverError("modeling_error_exact: negative projection defect " + std::to_string(worst) +
                        " at |alpha|^2 = " + std::to_string(s));
    }
    total.add(static_cast<double>(g.count[s]) * full - g.f_sum[s] * kept);
  }
  const double value = std::max(0.0, total.total());
  check_spectral_tail(value, 0.5 * biharmonic_tail_majorant(grid.d, cutoff.n_max), "modeling_error_exact");
  return value;
}

double uhat_second_moment_exact(const NoiseGrid& grid, double t, const SpectralCutoff& cutoff) {
  grid.validate();
  check_time_in(grid, t);
  const ModeGroups g = group_modes(grid, cutoff);
  const auto [n_t, partial] = active_slabs(grid, t);
  PairwiseAccumulator total;
  for (std::size_t s = 1; s < g.size(); ++s) {
    if (g.count[s] == 0) continue;
    total.add(g.f_sum[s] * sum_response_squares(g.L(s), grid.dt(), n_t, partial) / grid.dt());
  }
  const double value = total.total();
  check_spectral_tail(value,
                      0.5 * retained_tail_factor(grid, cutoff.n_max) * biharmonic_tail_majorant(grid.d, cutoff.n_max),
                      "uhat_second_moment_exact");
  return value;
}

namespace {

// Noise slabs nested in the steps, p = N_star / M per step. A slab i' places
// from the end of step m - k answers U^m with rho^{k+1} dt and u-hat(tau_m)
// with c exp(-L (k dtau + i' dt)), so the squared differences summed over i'
// are geometric sums, and the error at step m is a running sum over k.
std::vector<double> timedisc_errors_aligned(const NoiseGrid& grid, int M, const ModeGroups& g) {
  const std::int64_t p = grid.n_time / M;
  const double dt = grid.dt();
  const double dtau = grid.T / M;
  std::vector<PairwiseAccumulator> totals(static_cast<std::size_t>(M) + 1);
  for (std::size_t s = 1; s < g.size(); ++s) {
    if (g.count[s] == 0 || g.f_sum[s] == 0.0) continue;
    const double L = g.L(s);
    const double rho = 1.0 / (1.0 + dtau * L);
    const double c = -std::expm1(-L * dt) / L;
    const double s1 = p == 1 ? 1.0 : std::expm1(-L * dtau) / std::expm1(-L * dt);
    const double s2 = p == 1 ? 1.0 : std::expm1(-2.0 * L * dtau) / std::expm1(-2.0 * L * dt);
    double running = 0.0;
    double rho_pow = rho;
    for (int k = 0; k < M; ++k) {
      const double A = rho_pow * dt;
      const double B = c * std::exp(-L * dtau * k);
      const double term = p == 1 ? (A - B) * (A - B) : p * A * A - 2.0 * A * B * s1 + B * B * s2;
      running += std::max(0.0, term);
      totals[static_cast<std::size_t>(k) + 1].add(g.f_sum[s] * running / dt);
      rho_pow *= rho;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(M) + 1, 0.0);
  for (int m = 1; m <= M; ++m) out[static_cast<std::size_t>(m)] = totals[static_cast<std::size_t>(m)].total();
  return out;
}

std::vector<double> timedisc_errors(const NoiseGrid& grid, const TimePartition& partition,
                                    const SpectralCutoff& cutoff) {
  grid.validate();
  require_uniform(grid, partition);
  const ModeGroups g = group_modes(grid, cutoff);
  const int M = partition.steps();
  if (grid.n_time % M == 0) return timedisc_errors_aligned(grid, M, g);
  const auto overlaps = step_overlaps(grid, partition);
  std::vector<PairwiseAccumulator> totals(static_cast<std::size_t>(M) + 1);
  std::vector<double> E(static_cast<std::size_t>(grid.n_time));
  for (std::size_t s = 1; s < g.size(); ++s) {
    if (g.count[s] == 0 || g.f_sum[s] == 0.0) continue;
    const double L = g.L(s);
    std::fill(E.begin(), E.end(), 0.0);
    for (int m = 1; m <= M; ++m) {
      const double rho = 1.0 / (1.0 + partition.step(m) * L);
      for (double& e : E) e *= rho;
      for (const auto& [n, o] : overlaps[static_cast<std::size_t>(m - 1)]) E[static_cast<std::size_t>(n)] += rho * o;
      const double tau = partition.node(m);
      PairwiseAccumulator acc;
      for (std::int64_t n = 0; n < grid.n_time; ++n) {
        const double lo = grid.t_node(n);
        if (lo >= tau) break;
        const double diff = E[static_cast<std::size_t>(n)] - exp_cell_response(L, lo, grid.t_node(n + 1), tau);
        acc.add(diff * diff);
      }
      totals[static_cast<std::size_t>(m)].add(g.f_sum[s] * acc.total() / grid.dt());
    }
  }
  std::vector<double> out(static_cast<std::size_t>(M) + 1, 0.0);
  for (int m = 1; m <= M; ++m) out[static_cast<std::size_t>(m)] = totals[static_cast<std::size_t>(m)].total();
  return out;
}

}  // namespace

double timedisc_error_exact(const NoiseGrid& grid, const TimePartition& partition, int m,
                            const SpectralCutoff& cutoff) {
  if (m < 0 || m > partition.steps()) throw ValidationError("step index outside the partition");
  if (m == 0) {
    require_uniform(grid, partition);
    return 0.0;
  }
  const double value = timedisc_errors(grid, partition, cutoff)[static_cast<std::size_t>(m)];
  check_spectral_tail(value,
                      2.0 * retained_tail_factor(grid, cutoff.n_max) * biharmonic_tail_majorant(grid.d, cutoff.n_max),
                      "timedisc_error_exact");
  return value;
}

std::vector<double> timedisc_error_exact_all(const NoiseGrid& grid, const TimePartition& partition,
                                             const SpectralCutoff& cutoff) {
  std::vector<double> out = timedisc_errors(grid, partition, cutoff);
  const double worst = *std::max_element(out.begin(), out.end());
  check_spectral_tail(worst,
                      2.0 * retained_tail_factor(grid, cutoff.n_max) * biharmonic_tail_majorant(grid.d, cutoff.n_max),
                      "timedisc_error_exact_all");
  return out;
}

namespace {

// Aligned case: step m holds slabs i = 0..p-1 and follows (m-1) p full
// slabs. With the unit profile I(s) of one slab and Q(u) its integral over
// (0, u), inner slab i (u = (p - i) dt) gives J_i = dtau I(u) - Q(u), and the
// past slabs share the decay factor D = int_{Delta_m} (e^{-L dtau} - e^{-L (tau - a)}).
// Q(q dt) = Q0 + Q1 (1 + x + ... + x^{q-2}) with x = e^{-L dt}; Q0, Q1 and D
// come from Gauss quadrature.
double consistency_aligned(const NoiseGrid& grid, const ModeGroups& g, int m, int M, int points) {
  const std::int64_t p = grid.n_time / M;
  const double dt = grid.dt();
  const double dtau = grid.T / M;
  PairwiseAccumulator total;
  for (std::size_t s = 1; s < g.size(); ++s) {
    if (g.count[s] == 0 || g.f_sum[s] == 0.0) continue;
    const double L = g.L(s);
    const double c = -std::expm1(-L * dt) / L;
    const double x = std::exp(-L * dt);
    const double D = graded_integral([L, dtau](double r) { return std::exp(-L * dtau) - std::exp(-L * r); }, 0.0,
                                     dtau, L, points);
    const double q0 = graded_integral([L](double r) { return -std::expm1(-L * r) / L; }, 0.0, dt, L, points);
    const double q1 = graded_integral([L, c](double r) { return c * std::exp(-L * r); }, 0.0, dt, L, points);
    const double past = m > 1 ? D * D * sum_response_squares(L, dt, (m - 1) * p, dt) : 0.0;
    PairwiseAccumulator inner;
    double Q = q0;
    double profile = c;
    double geometric = 0.0;
    double x_pow = 1.0;
    for (std::int64_t q = 1; q <= p; ++q) {
      if (q > 1) {
        geometric += x_pow;
        x_pow *= x;
        Q = q0 + q1 * geometric;
        profile *= x;
      }
      const double J = dtau * profile - Q;
      inner.add(J * J);
    }
    total.add(g.f_sum[s] * (past + inner.total()) / dt);
  }
  return total.total();
}

double consistency_with(const NoiseGrid& grid, const ModeGroups& g, double a, double b, int points) {
  const double dt = grid.dt();
  PairwiseAccumulator total;
  for (std::size_t s = 1; s < g.size(); ++s) {
    if (g.count[s] == 0 || g.f_sum[s] == 0.0) continue;
    const double L = g.L(s);
    // Slabs ending before a share one time profile after a.
    const double decay_part = graded_integral(
        [L, a, b](double tau) { return std::exp(-L * (b - a)) - std::exp(-L * (tau - a)); }, a, b, L, points);
    PairwiseAccumulator acc;
    for (std::int64_t n = 0; n < grid.n_time; ++n) {
      const double lo = grid.t_node(n);
      const double hi = grid.t_node(n + 1);
      if (lo >= b) break;
      double J = 0.0;
      if (hi <= a) {
        J = decay_part * exp_cell_response(L, lo, hi, a);
      } else {
        const double at_end = exp_cell_response(L, lo, hi, b);
        auto integrand = [&](double tau) { return at_end - exp_cell_response(L, lo, hi, tau); };
        // Pieces of (a, b) cut by the slab ends; each has its layer at its left end.
        const double c1 = std::clamp(lo, a, b);
        const double c2 = std::clamp(hi, a, b);
        J = graded_integral(integrand, a, c1, L, points) + graded_integral(integrand, c1, c2, L, points) +
            graded_integral(integrand, c2, b, L, points);
      }
      acc.add(J * J);
    }
    total.add(g.f_sum[s] * acc.total() / dt);
  }
  return total.total();
}

}  // namespace

double consistency_sigma(const NoiseGrid& grid, const TimePartition& partition, int m, const SpectralCutoff& cutoff,
                         int time_points) {
  grid.validate();
  require_uniform(grid, partition);
  if (m < 1 || m > partition.steps()) throw ValidationError("consistency_sigma: step index must lie in 1..M");
  if (time_points < 1) throw ValidationError("consistency_sigma: need at least one time quadrature point");
  const ModeGroups g = group_modes(grid, cutoff);
  const double a = partition.node(m - 1);
  const double b = partition.node(m);
  const int M = partition.steps();
  const bool aligned = grid.n_time % M == 0;
  const double coarse = aligned ? consistency_aligned(grid, g, m, M, time_points)
                                : consistency_with(grid, g, a, b, time_points);
  const double fine = aligned ? consistency_aligned(grid, g, m, M, 2 * time_points)
                              : consistency_with(grid, g, a, b, 2 * time_points);
  if (std::abs(fine - coarse) > 1e-10 * std::abs(fine)) {
    throw GuardRefusal("consistency_sigma: time quadrature not converged (relative change " +
                       std::to_string(std::abs(fine - coarse) / std::abs(fine)) + ")");
  }
  if (fine == 0.0) return 0.0;
  const double k = b - a;
  check_spectral_tail(
      fine, 2.0 * k * k * retained_tail_factor(grid, cutoff.n_max) * biharmonic_tail_majorant(grid.d, cutoff.n_max),
      "consistency_sigma");
  return fine;
}

}  // namespace spde4
