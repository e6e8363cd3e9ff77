#include "spde4/bspline.hpp"

#include <algorithm>
#include <cmath>

#include "spde4/errors.hpp"

namespace spde4 {

BSplineBasis1D::BSplineBasis1D(int degree, int elements) : degree_(degree), elements_(elements) {
  if (degree < 2 || degree > kMaxDegree) throw ValidationError("spline degree must be 2, 3 or 4");
  if (elements < 1) throw ValidationError("need at least one element per dimension");
  knots_.assign(static_cast<std::size_t>(degree + 1), 0.0);
  for (int i = 1; i < elements; ++i) knots_.push_back(static_cast<double>(i) / elements);
  knots_.insert(knots_.end(), static_cast<std::size_t>(degree + 1), 1.0);
}

int BSplineBasis1D::element_of(double x) const {
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("spline evaluation outside [0, 1]");
  const int e = static_cast<int>(std::floor(x * elements_));
  return std::clamp(e, 0, elements_ - 1);
}

int BSplineBasis1D::constrained_index(int full) const {
  if (full <= 0 || full >= elements_ + degree_ - 1) return -1;
  return full - 1;
}

// Cox-de Boor values with derivatives, after Piegl & Tiller, Algorithm A2.3.
BSplineBasis1D::LocalValues BSplineBasis1D::evaluate_local(int e, double x) const {
  const int p = degree_;
  const int span = e + p;
  const auto U = [this](int i) { return knots_[static_cast<std::size_t>(i)]; };

  double ndu[kMaxDegree + 1][kMaxDegree + 1] = {};
  double left[kMaxDegree + 1] = {};
  double right[kMaxDegree + 1] = {};
  ndu[0][0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - U(span + 1 - j);
    right[j] = U(span + j) - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[j][r] = right[r + 1] + left[j - r];
      const double temp = ndu[r][j - 1] / ndu[j][r];
      ndu[r][j] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu[j][j] = saved;
  }

  LocalValues ders{};
  for (int j = 0; j <= p; ++j) ders[0][static_cast<std::size_t>(j)] = ndu[j][p];

  const int nd = std::min(kMaxDerivative, p);
  double a[2][kMaxDegree + 1] = {};
  for (int r = 0; r <= p; ++r) {
    int s1 = 0;
    int s2 = 1;
    a[0][0] = 1.0;
    for (int k = 1; k <= nd; ++k) {
      double d = 0.0;
      const int rk = r - k;
      const int pk = p - k;
      if (r >= k) {
        a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
        d = a[s2][0] * ndu[rk][pk];
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
        d += a[s2][j] * ndu[rk + j][pk];
      }
      if (r <= pk) {
        a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
        d += a[s2][k] * ndu[r][pk];
      }
      ders[static_cast<std::size_t>(k)][static_cast<std::size_t>(r)] = d;
      std::swap(s1, s2);
    }
  }
  double factor = p;
  for (int k = 1; k <= nd; ++k) {
    for (int j = 0; j <= p; ++j) ders[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] *= factor;
    factor *= (p - k);
  }
  return ders;
}

Eigen::MatrixXd BSplineBasis1D::collocation(std::span<const double> points, int deriv,
                                            std::span<const int> elements) const {
  if (deriv < 0 || deriv > kMaxDerivative) throw ValidationError("derivative order must be 0, 1 or 2");
  if (!elements.empty() && elements.size() != points.size()) throw ValidationError("element list size mismatch");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(points.size()), size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    const int e = elements.empty() ? element_of(points[p]) : elements[p];
    const LocalValues v = evaluate_local(e, points[p]);
    for (int i = 0; i <= degree_; ++i) {
      const int c = constrained_index(e + i);
      if (c >= 0) A(static_cast<Eigen::Index>(p), c) = v[static_cast<std::size_t>(deriv)][static_cast<std::size_t>(i)];
    }
  }
  return A;
}

}  // namespace spde4
