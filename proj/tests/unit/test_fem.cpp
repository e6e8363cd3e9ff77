#include <cmath>
#include <sstream>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "spde4/errors.hpp"
#include "spde4/bspline.hpp"
#include "spde4/fem.hpp"
#include "spde4/quadrature.hpp"
#include "oracles.hpp"

using namespace spde4;

class Degrees : public ::testing::TestWithParam<int> {};
INSTANTIATE_TEST_SUITE_P(Fem, Degrees, ::testing::Values(2, 3, 4));

TEST_P(Degrees, PartitionOfUnityAndBoundaryTrace) {
  const BSplineBasis1D b(GetParam(), 5);
  EXPECT_EQ(b.size(), 5 + GetParam() - 2);
  for (int e = 0; e < 5; ++e) {
    for (double t : {0.0, 0.3, 0.77, 1.0}) {
      const double x = b.element_begin(e) + t * b.h();
      const auto v = b.evaluate_local(e, x);
      double s = 0.0;
      double ds = 0.0;
      for (int i = 0; i <= b.degree(); ++i) {
        s += v[0][i];
        ds += v[1][i];
      }
      EXPECT_NEAR(s, 1.0, 1e-14);
      EXPECT_NEAR(ds, 0.0, 1e-11);
    }
  }
  const std::vector<double> ends{0.0, 1.0};
  const Eigen::MatrixXd trace = b.collocation(ends, 0);
  EXPECT_LE(trace.cwiseAbs().maxCoeff(), 1e-12);
}

TEST_P(Degrees, OneDimensionalMatricesMatchQuadrature) {
  const int r = GetParam();
  const BSplineBasis1D b(r, 4);
  std::vector<double> x;
  std::vector<double> w;
  for (int e = 0; e < 4; ++e) {
    const GaussRule rule = gauss_legendre(r + 2, b.element_begin(e), b.element_end(e));
    x.insert(x.end(), rule.nodes.begin(), rule.nodes.end());
    w.insert(w.end(), rule.weights.begin(), rule.weights.end());
  }
  const Eigen::MatrixXd v0 = b.collocation(x, 0);
  const Eigen::MatrixXd v2 = b.collocation(x, 2);
  const Eigen::VectorXd W = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  const FemSpace s(1, r, 4);
  EXPECT_LE((v0.transpose() * W.asDiagonal() * v0 - s.mass_1d()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((v2.transpose() * W.asDiagonal() * v2 - s.second_1d()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LE((v2.transpose() * W.asDiagonal() * v0 - s.cross_1d()).cwiseAbs().maxCoeff(), 1e-11);
}

TEST_P(Degrees, AssemblyMatchesDenseQuadrature2d) {
  const int r = GetParam();
  const FemSpace s(2, r, 3);
  const auto ops = assemble(s);
  const auto& b = s.basis();
  const int n = s.dofs_1d();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n * n, n * n);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n * n, n * n);
  for (int ex = 0; ex < 3; ++ex)
    for (int ey = 0; ey < 3; ++ey) {
      const GaussRule qx = gauss_legendre(r + 2, b.element_begin(ex), b.element_end(ex));
      const GaussRule qy = gauss_legendre(r + 2, b.element_begin(ey), b.element_end(ey));
      for (int p = 0; p < qx.size(); ++p)
        for (int q = 0; q < qy.size(); ++q) {
          const double xs[1] = {qx.nodes[p]};
          const double ys[1] = {qy.nodes[q]};
          const Eigen::MatrixXd bx0 = b.collocation(xs, 0), bx2 = b.collocation(xs, 2);
          const Eigen::MatrixXd by0 = b.collocation(ys, 0), by2 = b.collocation(ys, 2);
          Eigen::VectorXd val(n * n), lap(n * n);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
              val(i * n + j) = bx0(0, i) * by0(0, j);
              lap(i * n + j) = bx2(0, i) * by0(0, j) + bx0(0, i) * by2(0, j);
            }
          const double wt = qx.weights[p] * qy.weights[q];
          M += wt * val * val.transpose();
          K += wt * lap * lap.transpose();
        }
    }
  const Eigen::MatrixXd Ma = Eigen::MatrixXd(ops.mass.matrix);
  const Eigen::MatrixXd Ka = Eigen::MatrixXd(ops.stiffness.matrix);
  EXPECT_LE((Ma - M).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((Ka - K).cwiseAbs().maxCoeff(), 1e-9 * K.cwiseAbs().maxCoeff());
  EXPECT_EQ((Ka - Ka.transpose()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(ops.mass.role, OperatorRole::mass);
  EXPECT_EQ(ops.stiffness.role, OperatorRole::biharmonic_stiffness);
}

TEST_P(Degrees, OperatorsArePositiveDefinite) {
  for (int d = 1; d <= 3; ++d) {
    const FemSpace s(d, GetParam(), d == 3 ? 2 : 4);
    const auto ops = assemble(s);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em{Eigen::MatrixXd(ops.mass.matrix)};
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ek{Eigen::MatrixXd(ops.stiffness.matrix)};
    EXPECT_GT(em.eigenvalues().minCoeff(), 0.0);
    EXPECT_GT(ek.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(Fem, GalerkinOrthogonality) {
  const FemDiscretization disc(2, 3, 6);
  const SpectralCutoff c{2, 3};
  SpectralField f(c);
  f.at(MultiIndex{1, 1}) = 1.0;
  f.at(MultiIndex{2, 3}) = -0.5;
  const FemFunction u = solve_biharmonic(disc, f);
  const Eigen::VectorXd load = disc.spectral_load(f);
  const Eigen::VectorXd residual = disc.stiffness().matrix * u.coeffs - load;
  EXPECT_LE(residual.norm(), 1e-10 * load.norm());
}

TEST(Fem, SpectralLoadMatchesQuadratureLoad) {
  const FemDiscretization disc(2, 2, 5);
  const SpectralCutoff c{2, 4};
  SpectralField f(c);
  f.at(MultiIndex{1, 2}) = 0.7;
  f.at(MultiIndex{4, 1}) = 0.2;
  const Eigen::VectorXd a = disc.spectral_load(f);
  const Eigen::VectorXd b = disc.function_load([&f](std::span<const double> x) { return f.evaluate(x); }, 10);
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Fem, ProjectionReproducesDiscreteFunctions) {
  const FemDiscretization disc(2, 3, 4);
  Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(disc.space().dofs()), -1.0, 2.0);
  const FemFunction fh = disc.make_function(c);
  const FemFunction p = l2_project(disc, [&fh](std::span<const double> x) { return fh.evaluate(x); }, 6);
  EXPECT_LE((p.coeffs - c).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Fem, EllipticL2RateForCubics) {
  const SpectralCutoff c{2, 1};
  const SpectralField f = SpectralField::unit(c, MultiIndex{1, 1});
  const SpectralField exact = biharmonic_inverse(f);
  std::vector<double> err;
  for (int K : {4, 8, 16}) {
    const FemDiscretization disc(2, 3, K);
    err.push_back(fem_vs_spectral_error(solve_biharmonic(disc, f), exact));
  }
  EXPECT_GT(std::log2(err[0] / err[1]), 3.5);
  EXPECT_GT(std::log2(err[1] / err[2]), 3.5);
}

TEST(Fem, BackwardEulerIsUnconditionallyStable) {
  const FemDiscretization disc(2, 2, 6);
  const SpectralCutoff c{2, 5};
  SpectralField w0(c);
  for (std::size_t i = 0; i < c.size(); ++i) w0[i] = 1.0 / (1.0 + i);
  const double start = l2_norm(disc, l2_project(disc, w0).coeffs);
  for (double k : {1e-6, 1e-2, 10.0, 1e6}) {
    const auto path = deterministic_fd_path(disc, w0, TimePartition::uniform(20 * k, 20));
    double previous = start;
    for (const auto& s : path.states) {
      const double n = l2_norm(disc, s.coeffs);
      EXPECT_LE(n, previous * (1.0 + 1e-12));
      previous = n;
    }
  }
}

TEST(Fem, ZeroNoiseGivesZeroPath) {
  const FemDiscretization disc(1, 3, 4);
  const auto path = fully_discrete_path(disc, zero_noise(NoiseGrid{1, 0.1, 3, 4}), TimePartition::uniform(0.1, 5));
  for (const auto& s : path.states) EXPECT_EQ(s.coeffs.norm(), 0.0);
}

TEST(Fem, NoiseLoadsMatchPointwiseIntegration) {
  const FemDiscretization disc(1, 2, 3);
  const NoiseGrid g{1, 0.1, 2, 4};
  const auto r = sample(g, SeedSpec{4, 0});
  const Eigen::MatrixXd loads = disc.noise_loads(r);
  // Slab 1, integrated against each basis function on a rule cut at both the
  // element and the noise breakpoints.
  const std::vector<double> cuts{0.25, 0.5, 0.75, 1.0 / 3, 2.0 / 3};
  const GaussRule rule = composite_gauss(8, 0.0, 1.0, cuts);
  const Eigen::MatrixXd v = disc.space().basis().collocation(rule.nodes, 0);
  for (int i = 0; i < v.cols(); ++i) {
    double s = 0.0;
    for (int p = 0; p < rule.size(); ++p) {
      const double x[1] = {rule.nodes[p]};
      s += rule.weights[p] * v(p, i) * eval_What(r, 0.07, x);
    }
    EXPECT_NEAR(loads(i, 1), s, 1e-10 * (1.0 + std::abs(s)));
  }
}

TEST(Fem, ComparatorSquaredErrorMatchesQuadrature) {
  const FemDiscretization disc(2, 3, 4);
  const SpectralCutoff c{2, 6};
  SpectralField f(c);
  for (std::size_t i = 0; i < c.size(); ++i) f[i] = std::pow(-0.5, static_cast<double>(i % 5)) / (1.0 + i);
  const Eigen::VectorXd coeffs = l2_project(disc, f).coeffs * 0.9;
  const FemSpectralComparator cmp(disc.space_ptr(), c);
  const double q = cmp.l2_error(coeffs, f);
  EXPECT_NEAR(cmp.squared_error(coeffs, f), q * q, 1e-12);
  EXPECT_NEAR(q, fem_vs_spectral_error(disc.make_function(coeffs), f), 1e-13);
}

TEST(Fem, DiscreteEigenpairsAreMassOrthonormal) {
  const FemDiscretization disc(2, 2, 4);
  const auto eig = discrete_eigenpairs(disc);
  const Eigen::MatrixXd M(disc.mass().matrix);
  const Eigen::MatrixXd K(disc.stiffness().matrix);
  const Eigen::MatrixXd I = eig.vectors.transpose() * M * eig.vectors;
  EXPECT_LE((I - Eigen::MatrixXd::Identity(I.rows(), I.cols())).cwiseAbs().maxCoeff(), 1e-10);
  const Eigen::MatrixXd D = eig.vectors.transpose() * K * eig.vectors;
  EXPECT_LE((D - eig.values.asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff(), 1e-8 * eig.values.maxCoeff());
  // Lowest discrete eigenvalue approximates (2 pi^2)^2 from above.
  EXPECT_GE(eig.values(0), std::pow(2.0 * ref::pi * ref::pi, 2) * (1.0 - 1e-12));
  EXPECT_LE(eig.values(0), std::pow(2.0 * ref::pi * ref::pi, 2) * 1.05);
}

TEST(Fem, GuardsRefuseLargeSystems) {
  FemOptions o;
  o.dof_threshold = 10;
  EXPECT_THROW(FemDiscretization(2, 3, 8, o), GuardRefusal);
  FemOptions e;
  e.eigen_threshold = 5;
  const FemDiscretization disc(2, 3, 4, e);
  EXPECT_THROW(discrete_eigenpairs(disc), GuardRefusal);
}

TEST(Fem, CooExport) {
  const FemDiscretization disc(1, 2, 2);
  std::ostringstream out;
  export_matrix_coo(out, disc.mass());
  std::istringstream in(out.str());
  int r = 0;
  int c = 0;
  double v = 0.0;
  int lines = 0;
  const Eigen::MatrixXd M(disc.mass().matrix);
  while (in >> r >> c >> v) {
    EXPECT_EQ(v, M(r, c));
    ++lines;
  }
  EXPECT_EQ(lines, static_cast<int>(disc.mass().matrix.nonZeros()));
}
