#include "spde4/spectral.hpp"

#include <cmath>
#include <string>

#include "spde4/errors.hpp"
#include "spde4/summation.hpp"

namespace spde4 {

namespace {

void check_dim(int d) {
  if (d < 1 || d > kMaxDim) throw ValidationError("dimension must be 1, 2 or 3, got " + std::to_string(d));
}

void check_point(std::span<const double> x, int d) {
  if (static_cast<int>(x.size()) != d) throw ValidationError("point has wrong dimension");
}

// sin(pi p / q) with p reduced modulo 2q first, so large arguments stay exact.
double sin_pi_ratio(std::int64_t p, std::int64_t q) {
  std::int64_t r = p % (2 * q);
  if (r < 0) r += 2 * q;
  return std::sin(kPi * static_cast<double>(r) / static_cast<double>(q));
}

template <class F>
SpectralField map_eigen(const SpectralField& f, F&& factor) {
  SpectralField out(f.cutoff());
  const SpectralCutoff& c = f.cutoff();
  for (std::size_t i = 0; i < f.size(); ++i) {
    out[i] = f[i] * factor(eigenvalue(c.index_at(i)));
  }
  return out;
}

}  // namespace

MultiIndex::MultiIndex(std::initializer_list<int> alpha)
    : MultiIndex(std::span<const int>(alpha.begin(), alpha.size())) {}

MultiIndex::MultiIndex(std::span<const int> alpha) : dim_(static_cast<int>(alpha.size())) {
  check_dim(dim_);
  for (int i = 0; i < dim_; ++i) {
    if (alpha[static_cast<std::size_t>(i)] < 1) throw ValidationError("multi-index components must be >= 1");
    alpha_[static_cast<std::size_t>(i)] = alpha[static_cast<std::size_t>(i)];
  }
}

std::int64_t MultiIndex::norm_squared() const {
  std::int64_t s = 0;
  for (int i = 0; i < dim_; ++i) s += static_cast<std::int64_t>(alpha_[i]) * alpha_[i];
  return s;
}

void SpectralCutoff::validate() const {
  check_dim(d);
  if (n_max < 1) throw ValidationError("spectral cutoff n_max must be >= 1");
}

std::size_t SpectralCutoff::size() const {
  std::size_t s = 1;
  for (int i = 0; i < d; ++i) s *= static_cast<std::size_t>(n_max);
  return s;
}

std::size_t SpectralCutoff::flat_index(const MultiIndex& alpha) const {
  if (alpha.dim() != d) throw ValidationError("multi-index dimension does not match cutoff");
  std::size_t flat = 0;
  for (int i = 0; i < d; ++i) {
    if (alpha[i] > n_max) throw ValidationError("multi-index outside spectral cutoff");
    flat = flat * static_cast<std::size_t>(n_max) + static_cast<std::size_t>(alpha[i] - 1);
  }
  return flat;
}

MultiIndex SpectralCutoff::index_at(std::size_t flat) const {
  std::array<int, kMaxDim> a{};
  for (int i = d - 1; i >= 0; --i) {
    a[static_cast<std::size_t>(i)] = static_cast<int>(flat % static_cast<std::size_t>(n_max)) + 1;
    flat /= static_cast<std::size_t>(n_max);
  }
  return MultiIndex(std::span<const int>(a.data(), static_cast<std::size_t>(d)));
}

SpectralCutoff cutoff_for_time(int d, double t_min, int cap) {
  check_dim(d);
  if (!(t_min > 0.0)) throw ValidationError("cutoff_for_time: t_min must be positive");
  const double target = -std::log(1e-16);
  for (int n = 1; n < cap; ++n) {
    const double first_excluded = kPi * kPi * (static_cast<double>(n + 1) * (n + 1) + (d - 1));
    if (first_excluded * first_excluded * t_min > target) return {d, n};
  }
  return {d, cap};
}

SpectralField::SpectralField(SpectralCutoff cutoff) : cutoff_(cutoff) {
  cutoff_.validate();
  coeffs_.assign(cutoff_.size(), 0.0);
}

SpectralField::SpectralField(SpectralCutoff cutoff, std::vector<double> coeffs)
    : cutoff_(cutoff), coeffs_(std::move(coeffs)) {
  cutoff_.validate();
  if (coeffs_.size() != cutoff_.size()) throw ValidationError("spectral coefficient count does not match cutoff");
  for (double c : coeffs_) {
    if (!std::isfinite(c)) throw ValidationError("spectral coefficients must be finite");
  }
}

SpectralField SpectralField::unit(SpectralCutoff cutoff, const MultiIndex& alpha) {
  SpectralField f(cutoff);
  f.at(alpha) = 1.0;
  return f;
}

double SpectralField::evaluate(std::span<const double> x) const {
  check_point(x, cutoff_.d);
  const int n = cutoff_.n_max;
  std::vector<double> sines(static_cast<std::size_t>(cutoff_.d * n));
  for (int i = 0; i < cutoff_.d; ++i) {
    for (int a = 1; a <= n; ++a) {
      sines[static_cast<std::size_t>(i * n + a - 1)] = std::sqrt(2.0) * std::sin(a * kPi * x[static_cast<std::size_t>(i)]);
    }
  }
  PairwiseAccumulator acc;
  for (std::size_t k = 0; k < coeffs_.size(); ++k) {
    const MultiIndex alpha = cutoff_.index_at(k);
    double e = 1.0;
    for (int i = 0; i < cutoff_.d; ++i) e *= sines[static_cast<std::size_t>(i * n + alpha[i] - 1)];
    acc.add(coeffs_[k] * e);
  }
  return acc.total();
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  if (!(cutoff_ == other.cutoff_)) throw ValidationError("spectral fields have different cutoffs");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  if (!(cutoff_ == other.cutoff_)) throw ValidationError("spectral fields have different cutoffs");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double scale) {
  for (double& c : coeffs_) c *= scale;
  return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

double inner_product(const SpectralField& f, const SpectralField& g) {
  if (!(f.cutoff() == g.cutoff())) throw ValidationError("spectral fields have different cutoffs");
  PairwiseAccumulator acc;
  for (std::size_t i = 0; i < f.size(); ++i) acc.add(f[i] * g[i]);
  return acc.total();
}

double eigenvalue(const MultiIndex& alpha) {
  return kPi * kPi * static_cast<double>(alpha.norm_squared());
}

std::vector<double> eigenvalues(const SpectralCutoff& cutoff) {
  cutoff.validate();
  std::vector<double> out(cutoff.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = eigenvalue(cutoff.index_at(i));
  return out;
}

double eval_eigenfunction(const MultiIndex& alpha, std::span<const double> x) {
  check_point(x, alpha.dim());
  double v = std::pow(2.0, 0.5 * alpha.dim());
  for (int i = 0; i < alpha.dim(); ++i) {
    const double xi = x[static_cast<std::size_t>(i)];
    if (xi < 0.0 || xi > 1.0) throw ValidationError("eval_eigenfunction: point outside the closed unit cube");
    v *= std::sin(alpha[i] * kPi * xi);
  }
  return v;
}

double cell_integral_1d(int a, std::int64_t j, std::int64_t J) {
  if (J < 1 || j < 1 || j > J) throw ValidationError("cell index out of range");
  if (a < 1) throw ValidationError("mode index must be >= 1");
  // cos(A) - cos(B) = 2 sin((A+B)/2) sin((B-A)/2), A = a pi (j-1)/J, B = a pi j/J.
  const double mid = sin_pi_ratio(static_cast<std::int64_t>(a) * (2 * j - 1), 2 * J);
  const double half = sin_pi_ratio(a, 2 * J);
  return std::sqrt(2.0) * 2.0 * mid * half / (a * kPi);
}

double cell_integral(const MultiIndex& alpha, std::span<const std::int64_t> mu, std::int64_t J) {
  if (static_cast<int>(mu.size()) != alpha.dim()) throw ValidationError("cell index has wrong dimension");
  double v = 1.0;
  for (int i = 0; i < alpha.dim(); ++i) v *= cell_integral_1d(alpha[i], mu[static_cast<std::size_t>(i)], J);
  return v;
}

SpectralField semigroup_apply(const SpectralField& f, double t) {
  if (!(t >= 0.0)) throw ValidationError("semigroup_apply: time must be nonnegative");
  return map_eigen(f, [t](double lambda) { return std::exp(-lambda * lambda * t); });
}

SpectralField resolvent_apply(const SpectralField& f, double dtau) {
  if (!(dtau > 0.0)) throw ValidationError("resolvent_apply: step must be positive");
  return map_eigen(f, [dtau](double lambda) { return 1.0 / (1.0 + dtau * lambda * lambda); });
}

SpectralField elliptic_inverse(const SpectralField& f) {
  return map_eigen(f, [](double lambda) { return -1.0 / lambda; });
}

SpectralField biharmonic_inverse(const SpectralField& f) {
  return map_eigen(f, [](double lambda) { return 1.0 / (lambda * lambda); });
}

SpectralField laplacian(const SpectralField& f) {
  return map_eigen(f, [](double lambda) { return -lambda; });
}

double hdot_norm(const SpectralField& f, double s) {
  PairwiseAccumulator acc;
  const SpectralCutoff& c = f.cutoff();
  for (std::size_t i = 0; i < f.size(); ++i) {
    acc.add(std::pow(eigenvalue(c.index_at(i)), s) * f[i] * f[i]);
  }
  return std::sqrt(acc.total());
}

double green_kernel(double t, std::span<const double> x, std::span<const double> y,
                    const SpectralCutoff& cutoff) {
  if (!(t > 0.0)) throw ValidationError("green_kernel: time must be positive");
  cutoff.validate();
  check_point(x, cutoff.d);
  check_point(y, cutoff.d);
  PairwiseAccumulator acc;
  for (std::size_t k = 0; k < cutoff.size(); ++k) {
    const MultiIndex alpha = cutoff.index_at(k);
    const double lambda = eigenvalue(alpha);
    acc.add(std::exp(-lambda * lambda * t) * (eval_eigenfunction(alpha, x) * eval_eigenfunction(alpha, y)));
  }
  return acc.total();
}

}  // namespace spde4
