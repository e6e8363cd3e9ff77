#include "spde4/series.hpp"

#include <cmath>

#include "spde4/errors.hpp"
#include "spde4/spectral.hpp"
#include "spde4/summation.hpp"

namespace spde4 {

namespace {

// Area of the unit sphere in R^d.
double sphere_area(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return 2.0 * kPi;
    case 3: return 4.0 * kPi;
    default: throw ValidationError("dimension must be 1, 2 or 3");
  }
}

template <class Term>
double box_sum(int d, int n_max, Term&& term) {
  if (d < 1 || d > 3) throw ValidationError("dimension must be 1, 2 or 3");
  if (n_max < 1) throw ValidationError("cutoff must be >= 1");
  PairwiseAccumulator acc;
  const std::int64_t n = n_max;
  if (d == 1) {
    for (std::int64_t a = 1; a <= n; ++a) acc.add(term(a * a));
  } else if (d == 2) {
    for (std::int64_t a = 1; a <= n; ++a)
      for (std::int64_t b = 1; b <= n; ++b) acc.add(term(a * a + b * b));
  } else {
    for (std::int64_t a = 1; a <= n; ++a)
      for (std::int64_t b = 1; b <= n; ++b)
        for (std::int64_t c = 1; c <= n; ++c) acc.add(term(a * a + b * b + c * c));
  }
  return acc.total();
}

}  // namespace

double series_lemma_A1(int d, double c_star, double eps, int n_max) {
  if (!(c_star > 0.0) || !(eps > 0.0)) throw ValidationError("series_lemma_A1: c_star and eps must be positive");
  const double half_power = -0.5 * (d + c_star * eps);
  return box_sum(d, n_max, [half_power](std::int64_t norm2) {
    return std::pow(static_cast<double>(norm2), half_power);
  });
}

double series_lemma_A1_tail(int d, double c_star, double eps, int n_max) {
  const double s = c_star * eps;
  if (!(s > 0.0)) throw ValidationError("series_lemma_A1_tail: c_star * eps must be positive");
  return sphere_area(d) / std::pow(2.0, d) * std::pow(static_cast<double>(n_max), -s) / s;
}

double series_lemma_A2(int d, double delta, int n_max) {
  if (!(delta > 0.0)) throw ValidationError("series_lemma_A2: delta must be positive");
  const double pi4 = std::pow(kPi, 4);
  return box_sum(d, n_max, [delta, pi4](std::int64_t norm2) {
    const double L = pi4 * static_cast<double>(norm2) * static_cast<double>(norm2);
    return -std::expm1(-L * delta) / L;
  });
}

double p_d(int d, double s) {
  double sum = 1.0;
  double power = 1.0;
  for (int i = 1; i <= d; ++i) {
    power *= s;
    sum += power;
  }
  return sum;
}

double lattice_tail_majorant(int d, int n_max, double power) {
  if (!(power > d)) throw ValidationError("lattice_tail_majorant: power must exceed the dimension");
  // Every a outside the box has |a| >= n_max + 1; the unit cube [a - 1, a]
  // lies outside the ball of radius |a| - sqrt(d) and |x|^{-p} >= |a|^{-p}
  // on it.
  const double radius = n_max + 1.0 - std::sqrt(static_cast<double>(d));
  return sphere_area(d) / std::pow(2.0, d) * std::pow(radius, d - power) / (power - d);
}

double biharmonic_tail_majorant(int d, int n_max) {
  return lattice_tail_majorant(d, n_max, 4.0) / std::pow(kPi, 4);
}

}  // namespace spde4
