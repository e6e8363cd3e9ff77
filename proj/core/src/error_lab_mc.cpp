#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "spde4/error_lab.hpp"
#include "spde4/errors.hpp"
#include "spde4/quadrature.hpp"
#include "spde4/summation.hpp"

namespace spde4 {

namespace {

using ReplicateFn = std::function<std::vector<double>(int)>;

// Runs fn for replicates 0..count-1 on a small thread pool. Output row i is
// fn(i), so the result does not depend on scheduling.
std::vector<std::vector<double>> run_replicates(int count, int workers, const ReplicateFn& fn) {
  if (count < 1) throw ValidationError("need at least one replicate");
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(count));
  int threads = workers > 0 ? workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, count);
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(count));
  std::mutex mutex;
  int next = 0;
  auto work = [&] {
    for (;;) {
      int i = 0;
      {
        std::lock_guard lock(mutex);
        if (next >= count) return;
        i = next++;
      }
      try {
        rows[static_cast<std::size_t>(i)] = fn(i);
      } catch (...) {
        failures[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (int i = 0; i < count; ++i) {
    if (!failures[static_cast<std::size_t>(i)]) continue;
    try {
      std::rethrow_exception(failures[static_cast<std::size_t>(i)]);
    } catch (const SolverError& e) {
      throw SolverError("replicate " + std::to_string(i) + ": " + e.what());
    }
  }
  return rows;
}

NoiseRealization draw(const NoiseGrid& grid, const McOptions& options, int replicate) {
  if (options.zero_noise) return zero_noise(grid);
  return sample(grid, SeedSpec{options.master_seed, static_cast<std::uint64_t>(replicate)});
}

void check_options(const McOptions& options) {
  if (options.replicates < 2) throw ValidationError("Monte Carlo needs at least two replicates");
  if (options.bootstrap_resamples < 2) throw ValidationError("bootstrap needs at least two resamples");
}

McEstimate to_estimate(const BootstrapInterval& b) { return {b.estimate, b.sigma, b.low, b.high}; }

// Bootstrap seed derived from the master seed so the intervals are
// reproducible but not tied to the noise streams.
std::uint64_t bootstrap_seed(const McOptions& options, std::uint64_t salt) {
  return options.master_seed * 0x9E3779B97F4A7C15ULL + salt;
}

// Aggregates replicate rows of squared errors e[r][m] into per-m means,
// the weighted sum over m, and the maximum over m of the means.
PathErrorMoments aggregate(const std::vector<std::vector<double>>& rows, const std::vector<double>& weights,
                           const McOptions& options) {
  PathErrorMoments out;
  out.replicates = static_cast<int>(rows.size());
  const std::size_t steps = rows.front().size();
  std::vector<double> column(rows.size());
  for (std::size_t m = 0; m < steps; ++m) {
    for (std::size_t r = 0; r < rows.size(); ++r) column[r] = rows[r][m];
    out.per_step.push_back(to_estimate(bootstrap_mean(column, options.bootstrap_resamples, bootstrap_seed(options, m))));
  }
  if (!weights.empty()) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      double s = 0.0;
      for (std::size_t m = 0; m < steps; ++m) s += weights[m] * rows[r][m];
      column[r] = s;
    }
    out.l2t = to_estimate(bootstrap_mean(column, options.bootstrap_resamples, bootstrap_seed(options, 1u << 20)));
  }
  // Sup over the grid: the estimate at the time with the largest mean, so the
  // interval is a plain mean interval rather than a biased max-of-means one.
  const auto worst = std::max_element(out.per_step.begin(), out.per_step.end(),
                                      [](const McEstimate& x, const McEstimate& y) { return x.mean < y.mean; });
  out.linf = *worst;
  return out;
}

double squared_norm(const SpectralField& f) { return inner_product(f, f); }

void check_common(const NoiseGrid& grid, const FemDiscretization& disc, const SpectralCutoff& cutoff) {
  grid.validate();
  cutoff.validate();
  if (disc.space().dim() != grid.d || cutoff.d != grid.d) {
    throw ValidationError("noise grid, FEM space and cutoff must share the dimension");
  }
}

// Fully-discrete coefficients c^0..c^M for one realization.
std::vector<Eigen::VectorXd> fem_iterates(const FemDiscretization& disc, const NoiseRealization& r,
                                          const TimePartition& partition,
                                          const std::vector<std::vector<std::pair<std::int64_t, double>>>& overlaps) {
  const Eigen::MatrixXd loads = disc.noise_loads(r);
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(partition.steps()) + 1);
  out.emplace_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(disc.space().dofs())));
  for (int m = 1; m <= partition.steps(); ++m) {
    Eigen::VectorXd rhs = disc.mass().matrix * out.back();
    for (const auto& [n, o] : overlaps[static_cast<std::size_t>(m - 1)]) rhs += o * loads.col(static_cast<Eigen::Index>(n));
    out.push_back(disc.solve_step(partition.step(m), rhs));
  }
  return out;
}

}  // namespace

McEstimate uhat_second_moment_mc(const NoiseGrid& grid, double t, const SpectralCutoff& cutoff,
                                 const McOptions& options) {
  grid.validate();
  check_options(options);
  const auto rows = run_replicates(options.replicates, options.workers, [&](int i) {
    const NoiseRealization r = draw(grid, options, i);
    return std::vector<double>{squared_norm(uhat_coeffs(r, t, cutoff))};
  });
  std::vector<double> values(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) values[i] = rows[i][0];
  return to_estimate(bootstrap_mean(values, options.bootstrap_resamples, bootstrap_seed(options, 0)));
}

PathErrorMoments fulldisc_error_mc(const NoiseGrid& grid, const FemDiscretization& disc,
                                   const TimePartition& partition, const SpectralCutoff& cutoff,
                                   const McOptions& options) {
  check_common(grid, disc, cutoff);
  check_options(options);
  const auto overlaps = step_overlaps(grid, partition);
  const FemSpectralComparator compare(disc.space_ptr(), cutoff);
  const auto rows = run_replicates(options.replicates, options.workers, [&](int i) {
    const NoiseRealization r = draw(grid, options, i);
    const std::vector<Eigen::VectorXd> c = fem_iterates(disc, r, partition, overlaps);
    const SpectralPath u = uhat_path(r, partition.nodes(), cutoff);
    std::vector<double> e(c.size());
    for (std::size_t m = 0; m < c.size(); ++m) {
      e[m] = compare.squared_error(c[m], u.states[m]);
    }
    return e;
  });
  std::vector<double> weights(static_cast<std::size_t>(partition.steps()) + 1, 0.0);
  for (int m = 1; m <= partition.steps(); ++m) weights[static_cast<std::size_t>(m)] = partition.step(m);
  return aggregate(rows, weights, options);
}

PathErrorMoments timedisc_vs_fulldisc_mc(const NoiseGrid& grid, const FemDiscretization& disc,
                                         const TimePartition& partition, const SpectralCutoff& cutoff,
                                         const McOptions& options) {
  check_common(grid, disc, cutoff);
  check_options(options);
  if (!partition.is_uniform()) throw ValidationError("timedisc_vs_fulldisc_mc needs a uniform partition");
  const auto overlaps = step_overlaps(grid, partition);
  const FemSpectralComparator compare(disc.space_ptr(), cutoff);
  const auto rows = run_replicates(options.replicates, options.workers, [&](int i) {
    const NoiseRealization r = draw(grid, options, i);
    const std::vector<Eigen::VectorXd> c = fem_iterates(disc, r, partition, overlaps);
    const SpectralPath u = timediscrete_recursion(r, partition, cutoff);
    std::vector<double> e(c.size());
    for (std::size_t m = 0; m < c.size(); ++m) {
      e[m] = compare.squared_error(c[m], u.states[m]);
    }
    return e;
  });
  std::vector<double> weights(static_cast<std::size_t>(partition.steps()) + 1, 0.0);
  for (int m = 1; m <= partition.steps(); ++m) weights[static_cast<std::size_t>(m)] = partition.step(m);
  return aggregate(rows, weights, options);
}

PathErrorMoments semidiscrete_error_mc(const NoiseGrid& grid, const FemDiscretization& disc,
                                       const std::vector<double>& times, const SpectralCutoff& cutoff,
                                       const McOptions& options) {
  check_common(grid, disc, cutoff);
  check_options(options);
  if (times.empty()) throw ValidationError("semidiscrete_error_mc needs at least one time");
  for (double t : times) {
    if (!(t >= 0.0 && t <= grid.T)) throw ValidationError("semidiscrete_error_mc: time outside [0, T]");
  }
  const DiscreteEigenpairs eig = discrete_eigenpairs(disc);
  const FemSpectralComparator compare(disc.space_ptr(), cutoff);
  const auto rows = run_replicates(options.replicates, options.workers, [&](int i) {
    const NoiseRealization r = draw(grid, options, i);
    // Modal loads: column n holds X^T (W-hat on slab n, phi).
    const Eigen::MatrixXd modal = eig.vectors.transpose() * disc.noise_loads(r);
    const SpectralPath u = uhat_path(r, times, cutoff);
    std::vector<double> e(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
      Eigen::VectorXd z = Eigen::VectorXd::Zero(modal.rows());
      for (std::int64_t n = 0; n < grid.n_time && grid.t_node(n) < times[k]; ++n) {
        for (Eigen::Index j = 0; j < z.size(); ++j) {
          z(j) += modal(j, static_cast<Eigen::Index>(n)) *
                  exp_cell_response(eig.values(j), grid.t_node(n), grid.t_node(n + 1), times[k]);
        }
      }
      e[k] = compare.squared_error(eig.vectors * z, u.states[k]);
    }
    return e;
  });
  return aggregate(rows, {}, options);
}

DetFemStudy det_fem_study(const SpectralField& w0, int degree, const std::vector<int>& elements,
                          const TimePartition& partition, double slack) {
  if (elements.size() < 3) throw ValidationError("det_fem_study needs at least three element counts");
  const double T = partition.final_time();
  DetFemStudy study;
  study.semidiscrete.parameter = "h";
  study.fully_discrete.parameter = "h";
  study.semidiscrete.fixed = "degree " + std::to_string(degree) + ", T " + std::to_string(T);
  study.fully_discrete.fixed = study.semidiscrete.fixed + ", M " + std::to_string(partition.steps());
  const SpectralPath be = deterministic_be(w0, partition);
  // The error profile in time has layers of width h^4 at t = 0, so the time
  // integral uses a mesh graded geometrically towards 0.
  std::vector<double> bounds{0.0};
  for (int j = 50; j >= 0; --j) bounds.push_back(T * std::ldexp(1.0, -j));
  const GaussRule& rule = gauss_legendre(8);
  for (int K : elements) {
    FemDiscretization disc(w0.dim(), degree, K);
    const FemSpectralComparator compare(disc.space_ptr(), w0.cutoff());
    const DiscreteEigenpairs eig = discrete_eigenpairs(disc);
    PairwiseAccumulator semi;
    for (std::size_t b = 1; b < bounds.size(); ++b) {
      const double half = 0.5 * (bounds[b] - bounds[b - 1]);
      const double mid = 0.5 * (bounds[b] + bounds[b - 1]);
      for (int q = 0; q < rule.size(); ++q) {
        const double t = mid + half * rule.nodes[static_cast<std::size_t>(q)];
        const FemFunction wh = semidiscrete_evolution(disc, eig, w0, t);
        const double e = compare.l2_error(wh.coeffs, deterministic_exact(w0, t));
        semi.add(half * rule.weights[static_cast<std::size_t>(q)] * e * e);
      }
    }
    const FemPath fd = deterministic_fd_path(disc, w0, partition);
    PairwiseAccumulator full;
    for (int m = 1; m <= partition.steps(); ++m) {
      const double e = compare.l2_error(fd.states[static_cast<std::size_t>(m)].coeffs, be.states[static_cast<std::size_t>(m)]);
      full.add(partition.step(m) * e * e);
    }
    const double h = 1.0 / K;
    study.semidiscrete.resolutions.push_back(h);
    study.semidiscrete.errors.push_back(std::sqrt(semi.total()));
    study.fully_discrete.resolutions.push_back(h);
    study.fully_discrete.errors.push_back(std::sqrt(full.total()));
  }
  const double theory = nu_tilde(degree, 1.0);
  auto positive = [](const ConvergenceStudy& s) {
    return std::all_of(s.errors.begin(), s.errors.end(), [](double e) { return e > 0.0; });
  };
  // w0 = 0 gives identically zero errors and nothing to fit.
  if (positive(study.semidiscrete)) study.semidiscrete_rate = fit_rate(study.semidiscrete, theory, slack);
  if (positive(study.fully_discrete)) study.fully_discrete_rate = fit_rate(study.fully_discrete, theory, slack);
  return study;
}

}  // namespace spde4
