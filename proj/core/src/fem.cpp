#include "spde4/fem.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <unsupported/Eigen/KroneckerProduct>

#include "spde4/errors.hpp"
#include "spde4/quadrature.hpp"
#include "spde4/summation.hpp"
#include "tensor.hpp"

namespace spde4 {

using SpMat = Eigen::SparseMatrix<double>;

namespace {

// Gauss points of every element, element-major.
struct ElementPoints {
  std::vector<double> x;
  std::vector<double> w;
  std::vector<int> element;
};

ElementPoints element_points(const BSplineBasis1D& basis, int q) {
  ElementPoints pts;
  for (int e = 0; e < basis.elements(); ++e) {
    const GaussRule rule = gauss_legendre(q, basis.element_begin(e), basis.element_end(e));
    for (int i = 0; i < q; ++i) {
      pts.x.push_back(rule.nodes[static_cast<std::size_t>(i)]);
      pts.w.push_back(rule.weights[static_cast<std::size_t>(i)]);
      pts.element.push_back(e);
    }
  }
  return pts;
}

SpMat to_sparse(const Eigen::MatrixXd& dense) { return dense.sparseView(0.0, 0.0); }

SpMat kron_chain(const std::vector<const SpMat*>& factors) {
  SpMat out = *factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) {
    SpMat next = Eigen::kroneckerProduct(out, *factors[i]).eval();
    out = std::move(next);
  }
  return out;
}

using Cholesky = Eigen::SimplicialLLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>>;

Eigen::VectorXd solve_spd(const SpMat& A, const Cholesky* factor, const Eigen::VectorXd& rhs, double tol,
                          const char* what) {
  if (factor != nullptr && factor->info() == Eigen::Success) {
    Eigen::VectorXd x = factor->solve(rhs);
    if (factor->info() == Eigen::Success && x.allFinite()) return x;
  }
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>> cg;
  cg.setTolerance(tol);
  cg.setMaxIterations(static_cast<Eigen::Index>(10 * A.rows() + 100));
  cg.compute(A);
  Eigen::VectorXd x = cg.solve(rhs);
  if (cg.info() != Eigen::Success) {
    throw SolverError(std::string(what) + ": iterative fallback did not converge, relative residual " +
                      std::to_string(cg.error()));
  }
  return x;
}

std::unique_ptr<Cholesky> factorize(const SpMat& A) {
  auto f = std::make_unique<Cholesky>();
  f->compute(A);
  return f;
}

}  // namespace

// ---------------------------------------------------------------------------
// FemSpace

FemSpace::FemSpace(int d, int degree, int elements) : d_(d), basis_(degree, elements) {
  if (d < 1 || d > kMaxDim) throw ValidationError("FEM dimension must be 1, 2 or 3");
  const int n = basis_.size();
  if (n < 1) throw ValidationError("FEM space has no interior functions; increase the element count");
  mass_1d_ = Eigen::MatrixXd::Zero(n, n);
  second_1d_ = Eigen::MatrixXd::Zero(n, n);
  cross_1d_ = Eigen::MatrixXd::Zero(n, n);
  integrals_1d_ = Eigen::VectorXd::Zero(n);
  const int r = basis_.degree();
  for (int e = 0; e < basis_.elements(); ++e) {
    const GaussRule rule = gauss_legendre(r + 1, basis_.element_begin(e), basis_.element_end(e));
    for (int q = 0; q < rule.size(); ++q) {
      const auto v = basis_.evaluate_local(e, rule.nodes[static_cast<std::size_t>(q)]);
      const double w = rule.weights[static_cast<std::size_t>(q)];
      for (int i = 0; i <= r; ++i) {
        const int ci = basis_.constrained_index(e + i);
        if (ci < 0) continue;
        integrals_1d_(ci) += w * v[0][static_cast<std::size_t>(i)];
        for (int j = 0; j <= r; ++j) {
          const int cj = basis_.constrained_index(e + j);
          if (cj < 0) continue;
          mass_1d_(ci, cj) += w * v[0][static_cast<std::size_t>(i)] * v[0][static_cast<std::size_t>(j)];
          second_1d_(ci, cj) += w * v[2][static_cast<std::size_t>(i)] * v[2][static_cast<std::size_t>(j)];
          cross_1d_(ci, cj) += w * v[2][static_cast<std::size_t>(i)] * v[0][static_cast<std::size_t>(j)];
        }
      }
    }
  }
}

std::size_t FemSpace::dofs() const {
  std::size_t n = 1;
  for (int i = 0; i < d_; ++i) n *= static_cast<std::size_t>(dofs_1d());
  return n;
}

FemOperators assemble(const FemSpace& space) {
  const SpMat m0 = to_sparse(space.mass_1d());
  const SpMat m2 = to_sparse(space.second_1d());
  const SpMat c = to_sparse(space.cross_1d());
  const SpMat ct = SpMat(c.transpose());
  const int d = space.dim();

  std::vector<const SpMat*> factors(static_cast<std::size_t>(d), &m0);
  SpMat mass = kron_chain(factors);

  SpMat stiff(mass.rows(), mass.cols());
  for (int i = 0; i < d; ++i) {
    std::vector<const SpMat*> f(static_cast<std::size_t>(d), &m0);
    f[static_cast<std::size_t>(i)] = &m2;
    stiff += kron_chain(f);
  }
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      std::vector<const SpMat*> f(static_cast<std::size_t>(d), &m0);
      f[static_cast<std::size_t>(i)] = &ct;
      f[static_cast<std::size_t>(j)] = &c;
      stiff += kron_chain(f);
    }
  }
  const SpMat mass_t = mass.transpose();
  const SpMat stiff_t = stiff.transpose();
  mass = 0.5 * (mass + mass_t);
  stiff = 0.5 * (stiff + stiff_t);
  mass.makeCompressed();
  stiff.makeCompressed();
  return {{std::move(mass), OperatorRole::mass}, {std::move(stiff), OperatorRole::biharmonic_stiffness}};
}

// ---------------------------------------------------------------------------
// FemFunction

double FemFunction::evaluate(std::span<const double> x) const {
  const FemSpace& s = *space;
  const int d = s.dim();
  if (static_cast<int>(x.size()) != d) throw ValidationError("FEM evaluation point has wrong dimension");
  const BSplineBasis1D& b = s.basis();
  const int r = b.degree();
  const int n1 = s.dofs_1d();
  std::array<int, kMaxDim> elem{};
  std::array<BSplineBasis1D::LocalValues, kMaxDim> vals{};
  for (int i = 0; i < d; ++i) {
    elem[static_cast<std::size_t>(i)] = b.element_of(x[static_cast<std::size_t>(i)]);
    vals[static_cast<std::size_t>(i)] = b.evaluate_local(elem[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(i)]);
  }
  int local = 1;
  for (int i = 0; i < d; ++i) local *= (r + 1);
  double sum = 0.0;
  for (int k = 0; k < local; ++k) {
    int rest = k;
    std::size_t flat = 0;
    double w = 1.0;
    bool inside = true;
    for (int i = 0; i < d; ++i) {
      const int li = rest % (r + 1);
      rest /= (r + 1);
      const int ci = b.constrained_index(elem[static_cast<std::size_t>(i)] + li);
      if (ci < 0) {
        inside = false;
        break;
      }
      w *= vals[static_cast<std::size_t>(i)][0][static_cast<std::size_t>(li)];
      (void)flat;
    }
    if (!inside) continue;
    // Recompute the flat index with axis 0 slowest.
    rest = k;
    std::array<int, kMaxDim> idx{};
    for (int i = 0; i < d; ++i) {
      idx[static_cast<std::size_t>(i)] = b.constrained_index(elem[static_cast<std::size_t>(i)] + rest % (r + 1));
      rest /= (r + 1);
    }
    for (int i = 0; i < d; ++i) flat = flat * static_cast<std::size_t>(n1) + static_cast<std::size_t>(idx[static_cast<std::size_t>(i)]);
    sum += w * coeffs(static_cast<Eigen::Index>(flat));
  }
  return sum;
}

// ---------------------------------------------------------------------------
// FemDiscretization

struct FemDiscretization::Factorizations {
  std::mutex mutex;
  std::unique_ptr<Cholesky> mass;
  std::unique_ptr<Cholesky> stiffness;
  std::map<double, std::pair<SpMat, std::unique_ptr<Cholesky>>> steps;
  std::map<int, Eigen::MatrixXd> sine_moments;
  std::map<std::int64_t, Eigen::MatrixXd> cell_moments;
};

FemDiscretization::FemDiscretization(int d, int degree, int elements, FemOptions options)
    : space_(std::make_shared<const FemSpace>(d, degree, elements)),
      options_(options),
      factors_(std::make_unique<Factorizations>()) {
  if (space_->dofs() > options_.dof_threshold) {
    throw GuardRefusal("FEM space has " + std::to_string(space_->dofs()) + " dofs, above the threshold " +
                       std::to_string(options_.dof_threshold));
  }
  ops_ = assemble(*space_);
}

FemDiscretization::~FemDiscretization() = default;

Eigen::VectorXd FemDiscretization::solve_mass(const Eigen::VectorXd& rhs) const {
  const Cholesky* f = nullptr;
  {
    std::lock_guard lock(factors_->mutex);
    if (!factors_->mass) factors_->mass = factorize(ops_.mass.matrix);
    f = factors_->mass.get();
  }
  return solve_spd(ops_.mass.matrix, f, rhs, options_.iterative_tolerance, "mass solve");
}

Eigen::VectorXd FemDiscretization::solve_stiffness(const Eigen::VectorXd& rhs) const {
  const Cholesky* f = nullptr;
  {
    std::lock_guard lock(factors_->mutex);
    if (!factors_->stiffness) factors_->stiffness = factorize(ops_.stiffness.matrix);
    f = factors_->stiffness.get();
  }
  return solve_spd(ops_.stiffness.matrix, f, rhs, options_.iterative_tolerance, "biharmonic solve");
}

Eigen::VectorXd FemDiscretization::solve_step(double k, const Eigen::VectorXd& rhs) const {
  if (!(k > 0.0)) throw ValidationError("time step must be positive");
  const SpMat* A = nullptr;
  const Cholesky* f = nullptr;
  {
    std::lock_guard lock(factors_->mutex);
    auto it = factors_->steps.find(k);
    if (it == factors_->steps.end()) {
      SpMat system = ops_.mass.matrix + k * ops_.stiffness.matrix;
      auto factor = factorize(system);
      it = factors_->steps.emplace(k, std::make_pair(std::move(system), std::move(factor))).first;
    }
    A = &it->second.first;
    f = it->second.second.get();
  }
  return solve_spd(*A, f, rhs, options_.iterative_tolerance, "Backward Euler step");
}

Eigen::MatrixXd FemDiscretization::sine_moments_1d(int n_max) const {
  std::lock_guard lock(factors_->mutex);
  auto it = factors_->sine_moments.find(n_max);
  if (it != factors_->sine_moments.end()) return it->second;
  const BSplineBasis1D& b = space_->basis();
  const int q = b.degree() + 10 + static_cast<int>(std::ceil(n_max * kPi * b.h()));
  const ElementPoints pts = element_points(b, q);
  const Eigen::MatrixXd B = b.collocation(pts.x, 0, pts.element);
  Eigen::MatrixXd S(static_cast<Eigen::Index>(pts.x.size()), n_max);
  for (std::size_t p = 0; p < pts.x.size(); ++p)
    for (int a = 1; a <= n_max; ++a) S(static_cast<Eigen::Index>(p), a - 1) = pts.w[p] * std::sqrt(2.0) * std::sin(a * kPi * pts.x[p]);
  Eigen::MatrixXd out = B.transpose() * S;
  factors_->sine_moments.emplace(n_max, out);
  return out;
}

Eigen::MatrixXd FemDiscretization::cell_moments_1d(std::int64_t J) const {
  if (J < 1) throw ValidationError("noise grid needs J_star >= 1");
  std::lock_guard lock(factors_->mutex);
  auto it = factors_->cell_moments.find(J);
  if (it != factors_->cell_moments.end()) return it->second;
  const BSplineBasis1D& b = space_->basis();
  const int r = b.degree();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(b.size(), static_cast<Eigen::Index>(J));
  for (int e = 0; e < b.elements(); ++e) {
    const double e0 = b.element_begin(e);
    const double e1 = b.element_end(e);
    const auto j_first = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(e0 * J)) - 1);
    const auto j_last = std::min<std::int64_t>(J - 1, static_cast<std::int64_t>(std::ceil(e1 * J)));
    for (std::int64_t j = j_first; j <= j_last; ++j) {
      const double lo = std::max(e0, static_cast<double>(j) / J);
      const double hi = std::min(e1, static_cast<double>(j + 1) / J);
      if (!(hi > lo)) continue;
      // Exact: the integrand is one polynomial of degree r on (lo, hi).
      const GaussRule rule = gauss_legendre(r + 1, lo, hi);
      for (int q = 0; q < rule.size(); ++q) {
        const auto v = b.evaluate_local(e, rule.nodes[static_cast<std::size_t>(q)]);
        for (int i = 0; i <= r; ++i) {
          const int ci = b.constrained_index(e + i);
          if (ci >= 0) G(ci, static_cast<Eigen::Index>(j)) += rule.weights[static_cast<std::size_t>(q)] * v[0][static_cast<std::size_t>(i)];
        }
      }
    }
  }
  factors_->cell_moments.emplace(J, G);
  return G;
}

Eigen::VectorXd FemDiscretization::spectral_load(const SpectralField& f) const {
  if (f.dim() != space_->dim()) throw ValidationError("spectral field dimension does not match the FEM space");
  const Eigen::MatrixXd S = sine_moments_1d(f.cutoff().n_max);
  const std::array<const Eigen::MatrixXd*, 3> mats{&S, &S, &S};
  const std::vector<double> load =
      detail::apply_all_axes(f.coeffs(), space_->dim(), detail::cube_shape(space_->dim(), f.cutoff().n_max), mats);
  return Eigen::Map<const Eigen::VectorXd>(load.data(), static_cast<Eigen::Index>(load.size()));
}

Eigen::VectorXd FemDiscretization::function_load(const SpaceFunction& f, int points) const {
  if (points < 1) throw ValidationError("function_load: need at least one quadrature point");
  const BSplineBasis1D& b = space_->basis();
  const int d = space_->dim();
  const ElementPoints pts = element_points(b, points);
  const auto n = static_cast<Eigen::Index>(pts.x.size());
  std::int64_t total = 1;
  for (int i = 0; i < d; ++i) total *= n;
  std::vector<double> values(static_cast<std::size_t>(total));
  std::array<double, kMaxDim> x{};
  for (std::int64_t k = 0; k < total; ++k) {
    std::int64_t rest = k;
    double w = 1.0;
    for (int i = d - 1; i >= 0; --i) {
      const auto p = static_cast<std::size_t>(rest % n);
      rest /= n;
      x[static_cast<std::size_t>(i)] = pts.x[p];
      w *= pts.w[p];
    }
    values[static_cast<std::size_t>(k)] = w * f(std::span<const double>(x.data(), static_cast<std::size_t>(d)));
  }
  const Eigen::MatrixXd Bt = b.collocation(pts.x, 0, pts.element).transpose();
  const std::array<const Eigen::MatrixXd*, 3> mats{&Bt, &Bt, &Bt};
  const std::vector<double> load = detail::apply_all_axes(values, d, detail::cube_shape(d, n), mats);
  return Eigen::Map<const Eigen::VectorXd>(load.data(), static_cast<Eigen::Index>(load.size()));
}

Eigen::MatrixXd FemDiscretization::noise_loads(const NoiseRealization& r) const {
  const NoiseGrid& g = r.grid();
  if (g.d != space_->dim()) throw ValidationError("noise grid dimension does not match the FEM space");
  const Eigen::MatrixXd G = cell_moments_1d(g.j_space);
  const std::array<const Eigen::MatrixXd*, 3> mats{&G, &G, &G};
  Eigen::MatrixXd out(static_cast<Eigen::Index>(space_->dofs()), static_cast<Eigen::Index>(g.n_time));
  const double inv_vol = 1.0 / g.cell_volume();
  for (std::int64_t n = 0; n < g.n_time; ++n) {
    const std::vector<double> load = detail::apply_all_axes(r.slab(n), g.d, detail::cube_shape(g.d, g.j_space), mats);
    out.col(static_cast<Eigen::Index>(n)) =
        inv_vol * Eigen::Map<const Eigen::VectorXd>(load.data(), static_cast<Eigen::Index>(load.size()));
  }
  return out;
}

FemFunction FemDiscretization::make_function(Eigen::VectorXd coeffs) const {
  if (coeffs.size() != static_cast<Eigen::Index>(space_->dofs())) throw ValidationError("coefficient vector has wrong length");
  return FemFunction{space_, std::move(coeffs)};
}

// ---------------------------------------------------------------------------
// Projections and elliptic solves

FemFunction l2_project(const FemDiscretization& disc, const SpectralField& f) {
  return disc.make_function(disc.solve_mass(disc.spectral_load(f)));
}

FemFunction l2_project(const FemDiscretization& disc, const SpaceFunction& f, int points) {
  return disc.make_function(disc.solve_mass(disc.function_load(f, points)));
}

FemFunction solve_biharmonic(const FemDiscretization& disc, const SpectralField& f) {
  return disc.make_function(disc.solve_stiffness(disc.spectral_load(f)));
}

FemFunction solve_biharmonic(const FemDiscretization& disc, const SpaceFunction& f, int points) {
  return disc.make_function(disc.solve_stiffness(disc.function_load(f, points)));
}

DiscreteEigenpairs discrete_eigenpairs(const FemDiscretization& disc) {
  const std::size_t n = disc.space().dofs();
  if (n > disc.options().eigen_threshold) {
    throw GuardRefusal("discrete_eigenpairs: " + std::to_string(n) + " dofs exceed the dense eigensolver threshold " +
                       std::to_string(disc.options().eigen_threshold) + "; use Backward Euler time stepping instead");
  }
  const Eigen::MatrixXd K = Eigen::MatrixXd(disc.stiffness().matrix);
  const Eigen::MatrixXd M = Eigen::MatrixXd(disc.mass().matrix);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(K, M);
  if (solver.info() != Eigen::Success) throw SolverError("generalized eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

FemFunction semidiscrete_evolution(const FemDiscretization& disc, const DiscreteEigenpairs& eig,
                                   const SpectralField& w0, double t) {
  if (!(t >= 0.0)) throw ValidationError("semidiscrete_evolution: time must be nonnegative");
  const Eigen::VectorXd modal = eig.vectors.transpose() * disc.spectral_load(w0);
  const Eigen::VectorXd decayed = (modal.array() * (-eig.values.array() * t).exp()).matrix();
  return disc.make_function(eig.vectors * decayed);
}

double l2_norm(const FemDiscretization& disc, const Eigen::VectorXd& coeffs) {
  return std::sqrt(coeffs.dot(disc.mass().matrix * coeffs));
}

// ---------------------------------------------------------------------------
// FEM versus spectral comparison

struct FemSpectralComparator::Tables {
  std::shared_ptr<const FemSpace> space;
  SpectralCutoff cutoff;
  int q = 0;
  Eigen::Index points = 0;
  std::vector<double> weights;
  Eigen::MatrixXd B0;
  Eigen::MatrixXd B2;
  Eigen::MatrixXd S0;
  // Sine moments (b_i, sqrt(2) sin(a pi x)) for the Gram form.
  Eigen::MatrixXd moments;
};

FemSpectralComparator::FemSpectralComparator(std::shared_ptr<const FemSpace> space, const SpectralCutoff& cutoff,
                                             std::size_t max_points)
    : tables_(std::make_unique<Tables>()) {
  cutoff.validate();
  if (cutoff.d != space->dim()) throw ValidationError("cutoff dimension does not match the FEM space");
  const BSplineBasis1D& b = space->basis();
  const int q = b.degree() + 4 + static_cast<int>(std::ceil(cutoff.n_max * kPi * b.h()));
  double total = 1.0;
  for (int i = 0; i < space->dim(); ++i) total *= static_cast<double>(q) * b.elements();
  if (total > static_cast<double>(max_points)) {
    throw GuardRefusal("fem_vs_spectral_error: cutoff " + std::to_string(cutoff.n_max) +
                       " needs more quadrature points than allowed");
  }
  const ElementPoints pts = element_points(b, q);
  Tables& t = *tables_;
  t.space = std::move(space);
  t.cutoff = cutoff;
  t.q = q;
  t.points = static_cast<Eigen::Index>(pts.x.size());
  t.weights = pts.w;
  t.B0 = b.collocation(pts.x, 0, pts.element);
  t.B2 = b.collocation(pts.x, 2, pts.element);
  t.S0.resize(t.points, cutoff.n_max);
  for (Eigen::Index p = 0; p < t.points; ++p)
    for (int a = 1; a <= cutoff.n_max; ++a) t.S0(p, a - 1) = std::sqrt(2.0) * std::sin(a * kPi * pts.x[static_cast<std::size_t>(p)]);
  const ElementPoints mp = element_points(b, q + 4);
  Eigen::MatrixXd ws(static_cast<Eigen::Index>(mp.x.size()), cutoff.n_max);
  for (std::size_t p = 0; p < mp.x.size(); ++p)
    for (int a = 1; a <= cutoff.n_max; ++a) ws(static_cast<Eigen::Index>(p), a - 1) = mp.w[p] * std::sqrt(2.0) * std::sin(a * kPi * mp.x[p]);
  t.moments = b.collocation(mp.x, 0, mp.element).transpose() * ws;
}

FemSpectralComparator::~FemSpectralComparator() = default;
FemSpectralComparator::FemSpectralComparator(FemSpectralComparator&&) noexcept = default;

int FemSpectralComparator::points_per_element() const { return tables_->q; }

namespace {

double weighted_square_sum(const std::vector<double>& diff, const std::vector<double>& w, int d, Eigen::Index n) {
  PairwiseAccumulator acc;
  std::int64_t total = static_cast<std::int64_t>(diff.size());
  for (std::int64_t k = 0; k < total; ++k) {
    std::int64_t rest = k;
    double weight = 1.0;
    for (int i = 0; i < d; ++i) {
      weight *= w[static_cast<std::size_t>(rest % n)];
      rest /= n;
    }
    const double v = diff[static_cast<std::size_t>(k)];
    acc.add(weight * v * v);
  }
  return acc.total();
}

}  // namespace

double FemSpectralComparator::l2_error(const Eigen::VectorXd& fem_coeffs, const SpectralField& f) const {
  const Tables& t = *tables_;
  if (!(f.cutoff() == t.cutoff)) throw ValidationError("spectral field cutoff does not match the comparator");
  const int d = t.space->dim();
  if (fem_coeffs.size() != static_cast<Eigen::Index>(t.space->dofs())) throw ValidationError("coefficient vector has wrong length");
  const std::array<const Eigen::MatrixXd*, 3> bm{&t.B0, &t.B0, &t.B0};
  const std::array<const Eigen::MatrixXd*, 3> sm{&t.S0, &t.S0, &t.S0};
  std::vector<double> vh = detail::apply_all_axes(std::span<const double>(fem_coeffs.data(), static_cast<std::size_t>(fem_coeffs.size())),
                                                  d, detail::cube_shape(d, t.space->dofs_1d()), bm);
  const std::vector<double> vs = detail::apply_all_axes(f.coeffs(), d, detail::cube_shape(d, t.cutoff.n_max), sm);
  for (std::size_t k = 0; k < vh.size(); ++k) vh[k] -= vs[k];
  return std::sqrt(weighted_square_sum(vh, t.weights, d, t.points));
}

double FemSpectralComparator::squared_error(const Eigen::VectorXd& fem_coeffs, const SpectralField& f) const {
  const Tables& t = *tables_;
  if (!(f.cutoff() == t.cutoff)) throw ValidationError("spectral field cutoff does not match the comparator");
  const int d = t.space->dim();
  if (fem_coeffs.size() != static_cast<Eigen::Index>(t.space->dofs())) throw ValidationError("coefficient vector has wrong length");
  const std::span<const double> c(fem_coeffs.data(), static_cast<std::size_t>(fem_coeffs.size()));
  const Eigen::MatrixXd& m1 = t.space->mass_1d();
  const std::array<const Eigen::MatrixXd*, 3> mm{&m1, &m1, &m1};
  const std::array<const Eigen::MatrixXd*, 3> sm{&t.moments, &t.moments, &t.moments};
  const std::vector<double> mc = detail::apply_all_axes(c, d, detail::cube_shape(d, t.space->dofs_1d()), mm);
  const std::vector<double> load = detail::apply_all_axes(f.coeffs(), d, detail::cube_shape(d, t.cutoff.n_max), sm);
  double fem_sq = 0.0;
  double cross = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    fem_sq += c[k] * mc[k];
    cross += c[k] * load[k];
  }
  double spec_sq = 0.0;
  for (double v : f.coeffs()) spec_sq += v * v;
  const double value = fem_sq - 2.0 * cross + spec_sq;
  if (value < 1e-8 * (fem_sq + spec_sq)) {
    const double e = l2_error(fem_coeffs, f);
    return e * e;
  }
  return value;
}

double FemSpectralComparator::laplacian_error(const Eigen::VectorXd& fem_coeffs, const SpectralField& f) const {
  const Tables& t = *tables_;
  if (!(f.cutoff() == t.cutoff)) throw ValidationError("spectral field cutoff does not match the comparator");
  const int d = t.space->dim();
  const std::span<const double> c(fem_coeffs.data(), static_cast<std::size_t>(fem_coeffs.size()));
  std::vector<double> lap(static_cast<std::size_t>(std::pow(t.points, d)), 0.0);
  for (int i = 0; i < d; ++i) {
    std::array<const Eigen::MatrixXd*, 3> mats{&t.B0, &t.B0, &t.B0};
    mats[static_cast<std::size_t>(i)] = &t.B2;
    const std::vector<double> part = detail::apply_all_axes(c, d, detail::cube_shape(d, t.space->dofs_1d()), mats);
    for (std::size_t k = 0; k < lap.size(); ++k) lap[k] += part[k];
  }
  const SpectralField lf = laplacian(f);
  const std::array<const Eigen::MatrixXd*, 3> sm{&t.S0, &t.S0, &t.S0};
  const std::vector<double> vs = detail::apply_all_axes(lf.coeffs(), d, detail::cube_shape(d, t.cutoff.n_max), sm);
  for (std::size_t k = 0; k < lap.size(); ++k) lap[k] -= vs[k];
  return std::sqrt(weighted_square_sum(lap, t.weights, d, t.points));
}

double fem_vs_spectral_error(const FemFunction& fh, const SpectralField& f, std::size_t max_points) {
  return FemSpectralComparator(fh.space, f.cutoff(), max_points).l2_error(fh.coeffs, f);
}

double fem_vs_spectral_laplacian_error(const FemFunction& fh, const SpectralField& f, std::size_t max_points) {
  return FemSpectralComparator(fh.space, f.cutoff(), max_points).laplacian_error(fh.coeffs, f);
}

}  // namespace spde4
