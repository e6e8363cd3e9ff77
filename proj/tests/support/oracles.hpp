#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's spectral or error code: cell integrals use the antiderivative of
// the sine and every response is accumulated cell by cell.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace spde4::ref {

inline constexpr double pi = std::numbers::pi;

// integral of sqrt(2) sin(a pi x) over ((j-1)/J, j/J), from the antiderivative.
inline double sine_cell(int a, std::int64_t j, std::int64_t J) {
  const double lo = static_cast<double>(j - 1) / static_cast<double>(J);
  const double hi = static_cast<double>(j) / static_cast<double>(J);
  return std::sqrt(2.0) * (std::cos(a * pi * lo) - std::cos(a * pi * hi)) / (a * pi);
}

// sum_j b1(a, j)^2 / dx for J cells.
inline double retained_1d(int a, std::int64_t J) {
  double s = 0.0;
  for (std::int64_t j = 1; j <= J; ++j) s += sine_cell(a, j, J) * sine_cell(a, j, J);
  return s * static_cast<double>(J);
}

// integral over (lo, min(t, hi)) of exp(-L (t - s)) ds, written directly.
inline double response(double L, double lo, double hi, double t) {
  const double top = std::min(t, hi);
  if (top <= lo) return 0.0;
  return (std::exp(-L * (t - top)) - std::exp(-L * (t - lo))) / L;
}

// integral over (a, b) of response(L, lo, hi, tau) dtau, piece by piece.
inline double response_integral(double L, double lo, double hi, double a, double b) {
  double total = 0.0;
  // Rising part on (lo, hi): (1 - exp(-L (tau - lo))) / L.
  const double r0 = std::max(a, lo);
  const double r1 = std::min(b, hi);
  if (r1 > r0) total += ((r1 - r0) + (std::expm1(-L * (r1 - lo)) - std::expm1(-L * (r0 - lo))) / L) / L;
  // Decaying part after hi: (exp(-L (tau - hi)) - exp(-L (tau - lo))) / L.
  const double d0 = std::max(a, hi);
  if (b > d0) {
    const double decay = (std::exp(-L * (d0 - hi)) - std::exp(-L * (b - hi))) / L;
    total += decay * (-std::expm1(-L * (hi - lo))) / L;
  }
  return total;
}

// Calls f(alpha, L, F) for every alpha in [1, n]^d, with L = lambda^2 and F the
// retained fraction on a J-cell grid.
template <class Fn>
void for_each_mode(int d, int n, std::int64_t J, Fn&& f) {
  std::vector<double> ret(static_cast<std::size_t>(n) + 1);
  for (int a = 1; a <= n; ++a) ret[static_cast<std::size_t>(a)] = retained_1d(a, J);
  const int n2 = d >= 2 ? n : 1;
  const int n3 = d >= 3 ? n : 1;
  for (int a = 1; a <= n; ++a)
    for (int b = 1; b <= n2; ++b)
      for (int c = 1; c <= n3; ++c) {
        double norm2 = a * a;
        double F = ret[static_cast<std::size_t>(a)];
        if (d >= 2) {
          norm2 += b * b;
          F *= ret[static_cast<std::size_t>(b)];
        }
        if (d >= 3) {
          norm2 += c * c;
          F *= ret[static_cast<std::size_t>(c)];
        }
        const double lambda = pi * pi * norm2;
        f(a, b, c, lambda * lambda, F);
      }
}

// E||u(t) - u-hat(t)||^2 over [1, n]^d by summing cell responses slab by slab.
inline double modeling_error_brute(int d, double T, std::int64_t N, std::int64_t J, double t, int n) {
  const double dt = T / static_cast<double>(N);
  double total = 0.0;
  for_each_mode(d, n, J, [&](int, int, int, double L, double F) {
    double full = (1.0 - std::exp(-2.0 * L * t)) / (2.0 * L);
    double kept = 0.0;
    for (std::int64_t k = 0; k < N; ++k) {
      const double r = response(L, k * dt, (k + 1) * dt, t);
      kept += r * r;
    }
    total += full - F * kept / dt;
  });
  return total;
}

// E||u-hat(t)||^2 over [1, n]^d.
inline double uhat_moment_brute(int d, double T, std::int64_t N, std::int64_t J, double t, int n) {
  const double dt = T / static_cast<double>(N);
  double total = 0.0;
  for_each_mode(d, n, J, [&](int, int, int, double L, double F) {
    for (std::int64_t k = 0; k < N; ++k) {
      const double r = response(L, k * dt, (k + 1) * dt, t);
      total += F * r * r / dt;
    }
  });
  return total;
}

// E||U^m - u-hat(tau_m)||^2 for Backward Euler with M uniform steps on [0, T].
inline double timedisc_error_brute(int d, double T, std::int64_t N, std::int64_t J, int M, int m, int n) {
  const double dt = T / static_cast<double>(N);
  const double k = T / M;
  const double tau = m * k;
  double total = 0.0;
  for_each_mode(d, n, J, [&](int, int, int, double L, double F) {
    for (std::int64_t s = 0; s < N; ++s) {
      const double lo = s * dt;
      const double hi = (s + 1) * dt;
      double scheme = 0.0;
      for (int j = 1; j <= m; ++j) {
        const double overlap = std::max(0.0, std::min(hi, j * k) - std::max(lo, (j - 1) * k));
        scheme += overlap / dt * std::pow(1.0 + k * L, -(m - j + 1));
      }
      const double r = scheme - response(L, lo, hi, tau) / dt;
      total += F * r * r * dt;
    }
  });
  return total;
}

}  // namespace spde4::ref
