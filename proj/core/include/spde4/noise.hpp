#pragma once

// Piecewise-constant regularisation of space-time white noise.
//
// [0,T] x (0,1)^d is tiled by cells S_{n,mu} = T_n x D_mu of size
// dt x dx^d. One realization is the array R^{n,mu} of cell integrals of the
// white noise, iid N(0, dt dx^d); the regularised noise equals
// R^{n,mu} / (dt dx^d) on S_{n,mu}.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "spde4/spectral.hpp"

namespace spde4 {

struct NoiseGrid {
  int d = 2;
  double T = 0.1;
  std::int64_t n_time = 1;   // N_star
  std::int64_t j_space = 1;  // J_star, cells per dimension

  void validate() const;
  double dt() const { return T / static_cast<double>(n_time); }
  double dx() const { return 1.0 / static_cast<double>(j_space); }
  double t_node(std::int64_t n) const { return T * static_cast<double>(n) / static_cast<double>(n_time); }
  double x_node(std::int64_t j) const { return static_cast<double>(j) / static_cast<double>(j_space); }
  /// dt dx^d, the variance of one cell integral.
  double cell_volume() const;
  std::int64_t space_cells() const;
  std::int64_t cell_count() const { return n_time * space_cells(); }

  friend bool operator==(const NoiseGrid&, const NoiseGrid&) = default;
};

/// Identifies one independent noise stream. The Gaussian attached to cell
/// (n, mu) of replicate r is a pure function of (master_seed, r, n, mu), so
/// draws do not depend on sampling order and a fixed noise grid yields the
/// same realization whatever discretization consumes it.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t replicate_id = 0;

  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

/// Standard normal draw for one (seed, cell) counter.
double counter_normal(const SeedSpec& seed, std::uint64_t cell);

class NoiseRealization {
 public:
  /// Takes ownership of explicit cell values (row-major: time slowest, then mu
  /// lexicographically with the first space index slowest).
  NoiseRealization(NoiseGrid grid, SeedSpec seed, std::vector<double> values);

  const NoiseGrid& grid() const { return grid_; }
  const SeedSpec& seed() const { return seed_; }
  std::span<const double> values() const { return values_; }
  /// Cell values of time slab n (0-based), (J_star)^d entries.
  std::span<const double> slab(std::int64_t n) const;
  double at(std::int64_t n, std::int64_t flat_mu) const;

  NoiseRealization scaled(double factor) const;

 private:
  NoiseGrid grid_;
  SeedSpec seed_;
  std::vector<double> values_;
};

NoiseRealization sample(const NoiseGrid& grid, const SeedSpec& seed);
NoiseRealization zero_noise(const NoiseGrid& grid);

/// Cell containing a coordinate: 0-based, left-closed, last cell right-closed.
std::int64_t locate_cell(double coordinate, double lower, double upper, std::int64_t cells);

/// Regularised noise value at (t, x). Throws ValidationError outside
/// [0,T] x [0,1]^d.
double eval_What(const NoiseRealization& r, double t, std::span<const double> x);

/// g(t, x) with x of length d.
using SpaceTimeFunction = std::function<double(double, std::span<const double>)>;

/// Cell means (1 / (dt dx^d)) * integral of g over S_{n,mu}, computed with a
/// tensor Gauss rule of `points` points per coordinate. Ordered like the
/// realization values.
std::vector<double> project_pihat(const SpaceTimeFunction& g, const NoiseGrid& grid, int points);

/// Difference of the two sides of
///   sum_{n,mu} (cell mean of g) R^{n,mu}  and  integral of g times W-hat.
/// The left side uses project_pihat with `points` nodes, the right side
/// integrates the pointwise product with a different (points + 2) rule.
struct ItoPairResidual {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  /// sum of |cell mean * R|; the natural scale for a relative residual.
  double scale = 0.0;
};
ItoPairResidual ito_pair_check(const NoiseRealization& r, const SpaceTimeFunction& g, int points);

/// Coefficients (W-hat(t), e_a) on each time slab: entry n holds
/// sum_mu R^{n,mu} b_{a,mu} / (dt dx^d).
std::vector<SpectralField> noise_spectral_coeffs(const NoiseRealization& r,
                                                 const SpectralCutoff& cutoff);

/// Flat binary layout, little endian:
///   u32 d, u32 N_star, u32 J_star, u32 reserved(0), f64 T,
///   u64 master_seed, u64 replicate_id, then N_star * J_star^d f64 values.
void write_binary(std::ostream& out, const NoiseRealization& r);
NoiseRealization read_binary(std::istream& in);
/// CSV with header n,mu_1..mu_d,R (1-based indices). Refuses grids above
/// `max_cells` cells.
void write_csv(std::ostream& out, const NoiseRealization& r, std::int64_t max_cells = 100000);

}  // namespace spde4
