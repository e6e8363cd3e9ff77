#pragma once

// C^1 tensor-product spline Galerkin discretization of the biharmonic
// operator on the unit square/cube with v = 0 imposed on the boundary.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "spde4/bspline.hpp"
#include "spde4/noise.hpp"
#include "spde4/oracle.hpp"
#include "spde4/spectral.hpp"

namespace spde4 {

class FemSpace {
 public:
  /// d in {1,2,3}, degree in {2,3,4}, elements >= 1 per dimension.
  FemSpace(int d, int degree, int elements);

  int dim() const { return d_; }
  int degree() const { return basis_.degree(); }
  int elements() const { return basis_.elements(); }
  double h() const { return basis_.h(); }
  int dofs_1d() const { return basis_.size(); }
  std::size_t dofs() const;
  const BSplineBasis1D& basis() const { return basis_; }

  /// 1D Gram matrices: (b_i, b_j), (b_i'', b_j''), and C(p, q) = (b_p'', b_q).
  const Eigen::MatrixXd& mass_1d() const { return mass_1d_; }
  const Eigen::MatrixXd& second_1d() const { return second_1d_; }
  const Eigen::MatrixXd& cross_1d() const { return cross_1d_; }
  /// integral of each constrained 1D function.
  const Eigen::VectorXd& integrals_1d() const { return integrals_1d_; }

 private:
  int d_;
  BSplineBasis1D basis_;
  Eigen::MatrixXd mass_1d_;
  Eigen::MatrixXd second_1d_;
  Eigen::MatrixXd cross_1d_;
  Eigen::VectorXd integrals_1d_;
};

enum class OperatorRole { mass, biharmonic_stiffness, cross };

struct SparseOperator {
  Eigen::SparseMatrix<double> matrix;
  OperatorRole role = OperatorRole::mass;
};

struct FemOperators {
  SparseOperator mass;
  SparseOperator stiffness;
};

/// Mass and biharmonic stiffness via the Kronecker expansion
/// (Delta u, Delta v) = sum_{i,j} (d_ii u, d_jj v). The result is exactly
/// symmetric.
FemOperators assemble(const FemSpace& space);

struct FemOptions {
  /// Largest system handed to the sparse factorization.
  std::size_t dof_threshold = 200000;
  /// Largest system for the dense generalized eigensolver.
  std::size_t eigen_threshold = 4000;
  /// Relative tolerance of the conjugate-gradient fallback.
  double iterative_tolerance = 1e-11;
};

struct FemFunction {
  std::shared_ptr<const FemSpace> space;
  Eigen::VectorXd coeffs;

  double evaluate(std::span<const double> x) const;
};

using FemPath = Path<FemFunction>;
using SpaceFunction = std::function<double(std::span<const double>)>;

/// A FemSpace with its operators and cached factorizations of M, K_B and
/// M + k K_B. Immutable from the outside; the caches are guarded internally so
/// one instance may serve several threads.
class FemDiscretization {
 public:
  explicit FemDiscretization(int d, int degree, int elements, FemOptions options = {});
  ~FemDiscretization();
  FemDiscretization(const FemDiscretization&) = delete;
  FemDiscretization& operator=(const FemDiscretization&) = delete;

  const FemSpace& space() const { return *space_; }
  const std::shared_ptr<const FemSpace>& space_ptr() const { return space_; }
  const FemOptions& options() const { return options_; }
  const SparseOperator& mass() const { return ops_.mass; }
  const SparseOperator& stiffness() const { return ops_.stiffness; }

  Eigen::VectorXd solve_mass(const Eigen::VectorXd& rhs) const;
  Eigen::VectorXd solve_stiffness(const Eigen::VectorXd& rhs) const;
  /// (M + k K_B)^{-1} rhs, factorization cached per k.
  Eigen::VectorXd solve_step(double k, const Eigen::VectorXd& rhs) const;

  /// (f, phi_i) for a truncated spectral function.
  Eigen::VectorXd spectral_load(const SpectralField& f) const;
  /// (f, phi_i) by per-element Gauss quadrature with `points` per dimension.
  Eigen::VectorXd function_load(const SpaceFunction& f, int points) const;
  /// Column n holds (W-hat on slab n, phi_i).
  Eigen::MatrixXd noise_loads(const NoiseRealization& r) const;

  /// S(i, a-1) = integral of b_i(x) sqrt(2) sin(a pi x), a = 1..n_max.
  Eigen::MatrixXd sine_moments_1d(int n_max) const;
  /// G(i, j) = integral of b_i over noise cell j of a J-cell grid.
  Eigen::MatrixXd cell_moments_1d(std::int64_t J) const;

  FemFunction make_function(Eigen::VectorXd coeffs) const;

 private:
  struct Factorizations;

  std::shared_ptr<const FemSpace> space_;
  FemOptions options_;
  FemOperators ops_;
  std::unique_ptr<Factorizations> factors_;
};

/// P_h f.
FemFunction l2_project(const FemDiscretization& disc, const SpectralField& f);
FemFunction l2_project(const FemDiscretization& disc, const SpaceFunction& f, int points);

/// T_{B,h} f = B_h^{-1} P_h f, i.e. K_B c = (f, phi).
FemFunction solve_biharmonic(const FemDiscretization& disc, const SpectralField& f);
FemFunction solve_biharmonic(const FemDiscretization& disc, const SpaceFunction& f, int points);

/// Fully-discrete Backward Euler: U^0 = 0,
/// (M + k_m K_B) c^m = M c^{m-1} + int_{Delta_m} (W-hat, phi) ds.
FemPath fully_discrete_path(const FemDiscretization& disc, const NoiseRealization& r,
                            const TimePartition& partition);

/// Same recursion without forcing, W^0 = P_h w0.
FemPath deterministic_fd_path(const FemDiscretization& disc, const SpectralField& w0,
                              const TimePartition& partition);

/// M-orthonormal eigenvectors of K_B x = lambda M x, ascending eigenvalues.
struct DiscreteEigenpairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};
DiscreteEigenpairs discrete_eigenpairs(const FemDiscretization& disc);

/// Exact semidiscrete evolution S_h(t) P_h w0 using eigenpairs.
FemFunction semidiscrete_evolution(const FemDiscretization& disc, const DiscreteEigenpairs& eig,
                                   const SpectralField& w0, double t);

/// ||fh - f||_{L2}, by per-element Gauss quadrature fine enough for the
/// oscillation of the spectral modes. Refuses when the quadrature grid would
/// exceed `max_points`.
double fem_vs_spectral_error(const FemFunction& fh, const SpectralField& f,
                             std::size_t max_points = 20'000'000);
/// ||Delta fh - Delta f||_{L2} with Delta f taken spectrally.
double fem_vs_spectral_laplacian_error(const FemFunction& fh, const SpectralField& f,
                                       std::size_t max_points = 20'000'000);

/// Evaluates ||fh - f_i|| for many spectral fields sharing one cutoff and
/// one FEM space, reusing the quadrature tables.
class FemSpectralComparator {
 public:
  FemSpectralComparator(std::shared_ptr<const FemSpace> space, const SpectralCutoff& cutoff,
                        std::size_t max_points = 20'000'000);
  ~FemSpectralComparator();
  FemSpectralComparator(FemSpectralComparator&&) noexcept;

  double l2_error(const Eigen::VectorXd& fem_coeffs, const SpectralField& f) const;
  /// ||fh - f||^2 from c^T M c - 2 c^T (f, phi) + |f|^2, which avoids the
  /// quadrature grid. Falls back to l2_error^2 when the three terms cancel to
  /// below 1e-8 of their size.
  double squared_error(const Eigen::VectorXd& fem_coeffs, const SpectralField& f) const;
  double laplacian_error(const Eigen::VectorXd& fem_coeffs, const SpectralField& f) const;
  int points_per_element() const;

 private:
  struct Tables;
  std::unique_ptr<Tables> tables_;
};

/// sqrt(c^T M c).
double l2_norm(const FemDiscretization& disc, const Eigen::VectorXd& coeffs);

/// Coordinate text format, one "row col value" triple per line (0-based),
/// upper and lower triangle, 17 significant digits.
void export_matrix_coo(std::ostream& out, const SparseOperator& op);
/// Regular (samples^d) grid of point values including the boundary.
void write_grid_csv(std::ostream& out, const FemFunction& fh, int samples);

}  // namespace spde4
