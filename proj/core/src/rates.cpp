#include "spde4/rates.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "spde4/errors.hpp"

namespace spde4 {

std::pair<double, double> loglog_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("loglog_fit needs at least two paired points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ValidationError("loglog_fit needs positive data");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  if (sxx == 0.0) throw ValidationError("loglog_fit needs distinct abscissae");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

namespace {

struct Fit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  double spread = 0.0;
};

Fit fit_points(const std::vector<double>& x, const std::vector<double>& y) {
  Fit f;
  std::tie(f.slope, f.intercept) = loglog_fit(x, y);
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = std::log(y[i]) - (f.intercept + f.slope * std::log(x[i]));
    ss += r * r;
  }
  f.residual = std::sqrt(ss / static_cast<double>(x.size()));
  if (x.size() >= 3) {
    for (std::size_t skip = 0; skip < x.size(); ++skip) {
      std::vector<double> xs;
      std::vector<double> ys;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (i == skip) continue;
        xs.push_back(x[i]);
        ys.push_back(y[i]);
      }
      f.spread = std::max(f.spread, std::abs(loglog_fit(xs, ys).first - f.slope));
    }
  }
  return f;
}

}  // namespace

RateReport fit_rate(const ConvergenceStudy& study, double theory, double slack) {
  const auto& x = study.resolutions;
  const auto& y = study.errors;
  if (x.size() != y.size()) throw ValidationError("convergence study: resolutions and errors differ in length");
  if (x.size() < 3) throw ValidationError("convergence study needs at least three resolutions");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(y[i] > 0.0)) throw ValidationError("convergence study: error values must be positive");
    if (!(x[i] > 0.0)) throw ValidationError("convergence study: resolutions must be positive");
  }
  Fit fit = fit_points(x, y);
  RateReport report;
  const auto coarsest = static_cast<std::size_t>(std::max_element(x.begin(), x.end()) - x.begin());
  if (x.size() >= 4) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (i == coarsest) continue;
      xs.push_back(x[i]);
      ys.push_back(y[i]);
    }
    const Fit reduced = fit_points(xs, ys);
    if (std::abs(reduced.slope - fit.slope) > 0.1) {
      fit = reduced;
      report.coarsest_excluded = true;
    }
  }
  report.slope = fit.slope;
  report.intercept = fit.intercept;
  report.residual = fit.residual;
  report.leave_one_out_spread = fit.spread;
  report.theory = theory;
  report.slack = slack;
  report.pass = fit.slope >= theory - slack;
  return report;
}

double nu(int r, int d) {
  if (d < 1 || d > 3) throw ValidationError("nu: d must be 1, 2 or 3");
  if (r == 2) return (4.0 - d) / 3.0;
  if (r == 3 || r == 4) return (4.0 - d) / 2.0;
  throw ValidationError("nu: degree must be 2, 3 or 4");
}

double nu_tilde(int r, double theta) {
  switch (r) {
    case 2: return 2.0 * theta;
    case 3: return 4.0 * theta;
    case 4: return 5.0 * theta;
    default: throw ValidationError("nu_tilde: degree must be 2, 3 or 4");
  }
}

double xi_tilde(int r, double theta) {
  switch (r) {
    case 2: return 3.0 * theta - 2.0;
    case 3: return 4.0 * theta - 2.0;
    case 4: return 5.0 * theta - 2.0;
    default: throw ValidationError("xi_tilde: degree must be 2, 3 or 4");
  }
}

namespace {

double percentile(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

BootstrapInterval bootstrap(std::size_t replicates,
                            const std::function<double(std::span<const std::size_t>)>& statistic, int resamples,
                            std::uint64_t seed) {
  if (replicates < 1) throw ValidationError("bootstrap needs at least one replicate");
  if (resamples < 2) throw ValidationError("bootstrap needs at least two resamples");
  std::vector<std::size_t> idx(replicates);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  BootstrapInterval out;
  out.estimate = statistic(idx);

  std::mt19937_64 rng(seed);
  std::vector<double> stats(static_cast<std::size_t>(resamples));
  for (auto& s : stats) {
    for (auto& i : idx) i = static_cast<std::size_t>(rng() % replicates);
    s = statistic(idx);
  }
  const double mean = std::accumulate(stats.begin(), stats.end(), 0.0) / resamples;
  double ss = 0.0;
  for (double s : stats) ss += (s - mean) * (s - mean);
  out.sigma = std::sqrt(ss / (resamples - 1));
  std::sort(stats.begin(), stats.end());
  out.low = percentile(stats, 0.025);
  out.high = percentile(stats, 0.975);
  return out;
}

BootstrapInterval bootstrap_mean(std::span<const double> values, int resamples, std::uint64_t seed) {
  return bootstrap(
      values.size(),
      [values](std::span<const std::size_t> idx) {
        double s = 0.0;
        for (std::size_t i : idx) s += values[i];
        return s / static_cast<double>(idx.size());
      },
      resamples, seed);
}

}  // namespace spde4
