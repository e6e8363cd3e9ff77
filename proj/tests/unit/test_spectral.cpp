#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "spde4/errors.hpp"
#include "spde4/quadrature.hpp"
#include "spde4/series.hpp"
#include "spde4/spectral.hpp"
#include "spde4/summation.hpp"
#include "oracles.hpp"

using namespace spde4;

namespace {

SpectralField random_field(const SpectralCutoff& c, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  SpectralField f(c);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = n(rng) / (1.0 + static_cast<double>(i));
  return f;
}

}  // namespace

TEST(Quadrature, GaussIntegratesPolynomialsExactly) {
  for (int n = 1; n <= 12; ++n) {
    for (int p = 0; p <= 2 * n - 1; ++p) {
      const double got = integrate([p](double x) { return std::pow(x, p); }, 0.0, 1.0, n);
      EXPECT_NEAR(got, 1.0 / (p + 1), 1e-14) << "n=" << n << " p=" << p;
    }
  }
}

TEST(Quadrature, CompositeRuleSplitsAtBreakpoints) {
  const std::vector<double> cuts{-1.0, 0.3, 0.7, 2.0};
  const GaussRule rule = composite_gauss(2, 0.0, 1.0, cuts);
  EXPECT_EQ(rule.size(), 6);
  double s = 0.0;
  for (int i = 0; i < rule.size(); ++i) s += rule.weights[i] * std::abs(rule.nodes[i] - 0.3);
  EXPECT_NEAR(s, 0.5 * (0.09 + 0.49), 1e-15);
}

TEST(Summation, PairwiseMatchesLongDouble) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(100003);
  long double ref = 0.0L;
  for (auto& x : v) {
    x = u(rng);
    ref += x;
  }
  EXPECT_NEAR(pairwise_sum(v), static_cast<double>(ref), 1e-12);
  PairwiseAccumulator acc;
  for (double x : v) acc.add(x);
  EXPECT_EQ(acc.count(), v.size());
  EXPECT_NEAR(acc.total(), static_cast<double>(ref), 1e-12);
}

TEST(Spectral, LexicographicIndexing) {
  const SpectralCutoff c{3, 4};
  EXPECT_EQ(c.size(), 64u);
  EXPECT_EQ(c.flat_index(MultiIndex{1, 1, 1}), 0u);
  EXPECT_EQ(c.flat_index(MultiIndex{1, 1, 2}), 1u);
  EXPECT_EQ(c.flat_index(MultiIndex{2, 1, 1}), 16u);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(c.flat_index(c.index_at(i)), i);
  EXPECT_THROW((SpectralCutoff{4, 2}.validate()), ValidationError);
  EXPECT_THROW((MultiIndex{0, 1}), ValidationError);
}

TEST(Spectral, EigenfunctionsAreOrthonormal) {
  const int n = 4;
  const SpectralCutoff c{2, n};
  const GaussRule& rule = gauss_legendre(2 * n + 16);
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = 0; j < c.size(); ++j) {
      const MultiIndex a = c.index_at(i);
      const MultiIndex b = c.index_at(j);
      double s = 0.0;
      for (int p = 0; p < rule.size(); ++p) {
        for (int q = 0; q < rule.size(); ++q) {
          const double x[2] = {0.5 + 0.5 * rule.nodes[p], 0.5 + 0.5 * rule.nodes[q]};
          s += 0.25 * rule.weights[p] * rule.weights[q] * eval_eigenfunction(a, x) * eval_eigenfunction(b, x);
        }
      }
      EXPECT_NEAR(s, i == j ? 1.0 : 0.0, 1e-10);
    }
  }
}

TEST(Spectral, EigenvaluesArePiSquaredNorm) {
  EXPECT_DOUBLE_EQ(eigenvalue(MultiIndex{1, 1}), 2.0 * ref::pi * ref::pi);
  EXPECT_DOUBLE_EQ(eigenvalue(MultiIndex{1, 2, 3}), 14.0 * ref::pi * ref::pi);
}

TEST(Spectral, SemigroupLaw) {
  const SpectralCutoff c{2, 6};
  const SpectralField f = random_field(c, 1);
  const SpectralField a = semigroup_apply(semigroup_apply(f, 1e-4), 3e-4);
  const SpectralField b = semigroup_apply(f, 4e-4);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-14);
}

TEST(Spectral, BiharmonicInverseIsEllipticSquared) {
  const SpectralCutoff c{3, 3};
  const SpectralField f = random_field(c, 2);
  const SpectralField g = random_field(c, 3);
  const SpectralField tb = biharmonic_inverse(f);
  const SpectralField te2 = elliptic_inverse(elliptic_inverse(f));
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(tb[i], te2[i], 1e-17);
  EXPECT_NEAR(inner_product(biharmonic_inverse(f), g), inner_product(f, biharmonic_inverse(g)), 1e-15);
  // Delta T_E = I.
  const SpectralField back = laplacian(elliptic_inverse(f));
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(back[i], f[i], 1e-14);
}

TEST(Spectral, ResolventMatchesDefinition) {
  const SpectralCutoff c{1, 5};
  const SpectralField f = random_field(c, 4);
  const SpectralField r = resolvent_apply(f, 0.01);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double l = eigenvalue(c.index_at(i));
    EXPECT_NEAR(r[i] * (1.0 + 0.01 * l * l), f[i], 1e-14);
  }
}

TEST(Spectral, HdotZeroIsL2OfReconstruction) {
  const SpectralCutoff c{2, 5};
  const SpectralField f = random_field(c, 5);
  const GaussRule& rule = gauss_legendre(16);
  double s = 0.0;
  for (int p = 0; p < rule.size(); ++p) {
    for (int q = 0; q < rule.size(); ++q) {
      const double x[2] = {0.5 + 0.5 * rule.nodes[p], 0.5 + 0.5 * rule.nodes[q]};
      const double v = f.evaluate(x);
      s += 0.25 * rule.weights[p] * rule.weights[q] * v * v;
    }
  }
  EXPECT_NEAR(hdot_norm(f, 0.0), std::sqrt(s), 1e-8);
  EXPECT_LE(hdot_norm(f, -1.0), hdot_norm(f, 0.0));
}

TEST(Spectral, GreenKernelSymmetricBitwise) {
  const SpectralCutoff c{2, 20};
  const double x[2] = {0.13, 0.71};
  const double y[2] = {0.52, 0.29};
  EXPECT_EQ(green_kernel(1e-3, x, y, c) - green_kernel(1e-3, y, x, c), 0.0);
}

TEST(Spectral, CellIntegralsMatchAntiderivative) {
  for (int a = 1; a <= 9; ++a)
    for (std::int64_t j = 1; j <= 7; ++j) EXPECT_NEAR(cell_integral_1d(a, j, 7), ref::sine_cell(a, j, 7), 1e-15);
  const std::int64_t mu[2] = {2, 3};
  EXPECT_NEAR(cell_integral(MultiIndex{3, 1}, mu, 4), ref::sine_cell(3, 2, 4) * ref::sine_cell(1, 3, 4), 1e-15);
}

TEST(Spectral, BesselInequality) {
  for (std::int64_t J : {1, 2, 5, 8}) {
    for (int a = 1; a <= 40; ++a) {
      for (int b = 1; b <= 40; b += 3) {
        double s = 0.0;
        for (std::int64_t i = 1; i <= J; ++i)
          for (std::int64_t k = 1; k <= J; ++k) {
            const std::int64_t mu[2] = {i, k};
            const double v = cell_integral(MultiIndex{a, b}, mu, J);
            s += v * v;
          }
        EXPECT_LE(s, 1.0 / static_cast<double>(J * J) * (1.0 + 1e-12));
      }
    }
  }
}

TEST(Spectral, CutoffForTimeCoversRequestedDecay) {
  const SpectralCutoff c = cutoff_for_time(2, 1e-3);
  const double l = ref::pi * ref::pi * (c.n_max + 1) * (c.n_max + 1);
  EXPECT_LT(std::exp(-l * l * 1e-3), 1e-16);
  EXPECT_LE(cutoff_for_time(2, 1e-12, 50).n_max, 50);
}

TEST(Series, A1OneDimensionalIsZeta) {
  // d = 1: sum_a a^{-(1 + eps)} = zeta(1 + eps).
  for (double eps : {0.5, 1.0, 2.0}) {
    const int n = 200000;
    const double approx = series_lemma_A1(1, 1.0, eps, n) + series_lemma_A1_tail(1, 1.0, eps, n);
    EXPECT_NEAR(approx / std::riemann_zeta(1.0 + eps), 1.0, 1e-4) << eps;
  }
}

TEST(Series, A1BruteForce) {
  double s = 0.0;
  for (int a = 1; a <= 9; ++a)
    for (int b = 1; b <= 9; ++b) s += std::pow(a * a + b * b, -0.5 * 2.3);
  EXPECT_NEAR(series_lemma_A1(2, 1.0, 0.3, 9), s, 1e-13);
}

TEST(Series, A2BruteForceAndSmallDeltaLimit) {
  const double pi4 = std::pow(ref::pi, 4);
  double s = 0.0;
  for (int a = 1; a <= 12; ++a)
    for (int b = 1; b <= 12; ++b) {
      const double L = pi4 * std::pow(a * a + b * b, 2);
      s += (1.0 - std::exp(-L * 1e-3)) / L;
    }
  EXPECT_NEAR(series_lemma_A2(2, 1e-3, 12), s, 1e-15);
  // For delta -> 0 each term tends to delta.
  EXPECT_NEAR(series_lemma_A2(1, 1e-14, 3), 3e-14, 1e-24);
  EXPECT_DOUBLE_EQ(p_d(3, 2.0), 15.0);
}

TEST(Series, TailMajorantBoundsTheTail) {
  for (int d = 1; d <= 3; ++d) {
    const int n = 6;
    const int big = d == 3 ? 60 : 400;
    double tail = 0.0;
    SpectralCutoff c{d, big};
    for (std::size_t i = 0; i < c.size(); ++i) {
      const MultiIndex a = c.index_at(i);
      bool inside = true;
      for (int k = 0; k < d; ++k) inside = inside && a[k] <= n;
      if (!inside) tail += std::pow(static_cast<double>(a.norm_squared()), -2.0);
    }
    tail /= std::pow(ref::pi, 4);
    EXPECT_GE(biharmonic_tail_majorant(d, n), tail) << d;
    EXPECT_GE(lattice_tail_majorant(d, n, 4.0), tail * std::pow(ref::pi, 4)) << d;
  }
}
