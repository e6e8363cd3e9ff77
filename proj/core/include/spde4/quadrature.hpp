#pragma once

#include <span>
#include <vector>

namespace spde4 {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  int size() const { return static_cast<int>(nodes.size()); }
};

/// n-point Gauss-Legendre rule (exact for polynomials of degree 2n-1).
/// Rules are computed once and cached; the returned reference stays valid.
const GaussRule& gauss_legendre(int n);

/// Rule mapped to [a, b].
GaussRule gauss_legendre(int n, double a, double b);

/// Smallest point count integrating polynomials of `degree` exactly.
inline int points_for_degree(int degree) { return degree / 2 + 1; }

/// Integrate f over [a, b] with the n-point rule.
template <class F>
double integrate(F&& f, double a, double b, int n) {
  const GaussRule& rule = gauss_legendre(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (int i = 0; i < rule.size(); ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * sum;
}

/// Composite rule: [a, b] is cut at the given (sorted, possibly out of range)
/// breakpoints and each piece gets an n-point rule.
GaussRule composite_gauss(int n, double a, double b, std::span<const double> breakpoints);

}  // namespace spde4
