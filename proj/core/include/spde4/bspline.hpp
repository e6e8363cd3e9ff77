#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace spde4 {

/// Degree-r B-splines on the uniform open knot vector of [0, 1] with K
/// elements and maximal smoothness C^{r-1}. The two functions that do not
/// vanish at the endpoints are dropped, leaving K + r - 2 functions that all
/// satisfy v(0) = v(1) = 0.
class BSplineBasis1D {
 public:
  static constexpr int kMaxDegree = 4;
  static constexpr int kMaxDerivative = 2;

  BSplineBasis1D(int degree, int elements);

  int degree() const { return degree_; }
  int elements() const { return elements_; }
  double h() const { return 1.0 / elements_; }
  /// Number of constrained (boundary-free) functions.
  int size() const { return elements_ + degree_ - 2; }
  double element_begin(int e) const { return static_cast<double>(e) / elements_; }
  double element_end(int e) const { return static_cast<double>(e + 1) / elements_; }

  /// Element containing x in [0, 1]; x = 1 belongs to the last element.
  int element_of(double x) const;

  /// Values and derivatives 0..kMaxDerivative of the degree+1 full-basis
  /// functions nonzero on element e, evaluated at x:
  /// out[k][i] is derivative k of full function e + i.
  using LocalValues = std::array<std::array<double, kMaxDegree + 1>, kMaxDerivative + 1>;
  LocalValues evaluate_local(int e, double x) const;

  /// Constrained index of full function `full`, or -1 for the dropped ones.
  int constrained_index(int full) const;

  /// Dense matrix A(p, i) = derivative `deriv` of constrained function i at
  /// points[p]. `elements`, when non-empty, gives the element of each point.
  Eigen::MatrixXd collocation(std::span<const double> points, int deriv,
                              std::span<const int> elements = {}) const;

 private:
  int degree_;
  int elements_;
  std::vector<double> knots_;
};

}  // namespace spde4
