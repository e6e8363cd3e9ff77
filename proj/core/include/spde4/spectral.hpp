#pragma once

// Exact eigenstructure of the Dirichlet Laplacian on the unit cube (0,1)^d.
//
// The eigenpairs are lambda_a = pi^2 |a|^2 and
// e_a(z) = 2^{d/2} prod_i sin(a_i pi z_i), a in N^d. The same functions
// diagonalise the biharmonic operator with Navier conditions, with eigenvalue
// lambda_a^2. Everything here acts coefficient-wise on truncated expansions.

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace spde4 {

inline constexpr int kMaxDim = 3;
inline constexpr double kPi = 3.14159265358979323846;

/// Multi-index a = (a_1, ..., a_d) with every a_i >= 1.
class MultiIndex {
 public:
  MultiIndex(std::initializer_list<int> alpha);
  explicit MultiIndex(std::span<const int> alpha);

  int dim() const { return dim_; }
  int operator[](int i) const { return alpha_[static_cast<std::size_t>(i)]; }
  /// |a|^2 = sum_i a_i^2.
  std::int64_t norm_squared() const;

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

 private:
  std::array<int, kMaxDim> alpha_{};
  int dim_ = 0;
};

/// Truncation {a : a_i <= n_max} of N^d, ordered lexicographically with the
/// first component slowest.
struct SpectralCutoff {
  int d = 2;
  int n_max = 1;

  void validate() const;
  std::size_t size() const;
  std::size_t flat_index(const MultiIndex& alpha) const;
  MultiIndex index_at(std::size_t flat) const;

  friend bool operator==(const SpectralCutoff&, const SpectralCutoff&) = default;
};

/// Smallest cutoff whose first excluded mode satisfies
/// exp(-lambda^2 t_min) < 1e-16, capped at `cap`.
SpectralCutoff cutoff_for_time(int d, double t_min, int cap = 4096);

/// Truncated coefficient vector (v, e_a) over a SpectralCutoff.
class SpectralField {
 public:
  explicit SpectralField(SpectralCutoff cutoff);
  SpectralField(SpectralCutoff cutoff, std::vector<double> coeffs);

  static SpectralField unit(SpectralCutoff cutoff, const MultiIndex& alpha);

  const SpectralCutoff& cutoff() const { return cutoff_; }
  int dim() const { return cutoff_.d; }
  std::size_t size() const { return coeffs_.size(); }

  std::span<const double> coeffs() const { return coeffs_; }
  std::span<double> coeffs() { return coeffs_; }
  double operator[](std::size_t i) const { return coeffs_[i]; }
  double& operator[](std::size_t i) { return coeffs_[i]; }
  double at(const MultiIndex& alpha) const { return coeffs_[cutoff_.flat_index(alpha)]; }
  double& at(const MultiIndex& alpha) { return coeffs_[cutoff_.flat_index(alpha)]; }

  /// Point value of sum_a c_a e_a(x).
  double evaluate(std::span<const double> x) const;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(double scale);

 private:
  SpectralCutoff cutoff_;
  std::vector<double> coeffs_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

/// Coefficient inner product sum_a f_a g_a (the L2 inner product of the
/// reconstructed functions).
double inner_product(const SpectralField& f, const SpectralField& g);

/// lambda_a = pi^2 |a|^2.
double eigenvalue(const MultiIndex& alpha);
/// lambda_a for every index of the cutoff, in storage order.
std::vector<double> eigenvalues(const SpectralCutoff& cutoff);

double eval_eigenfunction(const MultiIndex& alpha, std::span<const double> x);

/// Integral of sqrt(2) sin(a pi x) over the cell ((j-1)/J, j/J), j = 1..J.
double cell_integral_1d(int a, std::int64_t j, std::int64_t J);
/// b_{a,mu} = integral of e_a over the cell D_mu of the uniform J^d grid
/// (mu is 1-based).
double cell_integral(const MultiIndex& alpha, std::span<const std::int64_t> mu, std::int64_t J);

/// S(t) = exp(-t Delta^2): multiplies c_a by exp(-lambda_a^2 t).
SpectralField semigroup_apply(const SpectralField& f, double t);
/// (I + dtau Delta^2)^{-1}: divides c_a by 1 + dtau lambda_a^2.
SpectralField resolvent_apply(const SpectralField& f, double dtau);
/// T_E, the solution operator of Delta v = f, v = 0 on the boundary.
SpectralField elliptic_inverse(const SpectralField& f);
/// T_B, the solution operator of Delta^2 v = f with Navier conditions.
SpectralField biharmonic_inverse(const SpectralField& f);
/// Spectral Laplacian: multiplies c_a by -lambda_a.
SpectralField laplacian(const SpectralField& f);

/// (sum_a lambda_a^s c_a^2)^{1/2} over the truncated set. For s < 0 this is a
/// lower bound of the untruncated norm.
double hdot_norm(const SpectralField& f, double s);

/// Truncated Green kernel sum_a exp(-lambda_a^2 t) e_a(x) e_a(y), t > 0.
double green_kernel(double t, std::span<const double> x, std::span<const double> y,
                    const SpectralCutoff& cutoff);

}  // namespace spde4
