#include "spde4/noise.hpp"

#include <array>
#include <cmath>
#include <string>

#include <boost/math/special_functions/erf.hpp>

#include "spde4/errors.hpp"
#include "spde4/quadrature.hpp"
#include "spde4/summation.hpp"
#include "tensor.hpp"

namespace spde4 {

namespace {

// Philox4x32-10 (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint64_t kM0 = 0xD2511F53u;
  constexpr std::uint64_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = kM0 * ctr[0];
    const std::uint64_t p1 = kM1 * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

}  // namespace

void NoiseGrid::validate() const {
  if (d < 1 || d > kMaxDim) throw ValidationError("noise grid dimension must be 1, 2 or 3");
  if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("noise grid final time must be positive");
  if (n_time < 1) throw ValidationError("noise grid needs N_star >= 1");
  if (j_space < 1) throw ValidationError("noise grid needs J_star >= 1");
}

double NoiseGrid::cell_volume() const { return dt() * std::pow(dx(), d); }

std::int64_t NoiseGrid::space_cells() const {
  std::int64_t s = 1;
  for (int i = 0; i < d; ++i) s *= j_space;
  return s;
}

double counter_normal(const SeedSpec& seed, std::uint64_t cell) {
  const std::array<std::uint32_t, 4> ctr{
      static_cast<std::uint32_t>(cell), static_cast<std::uint32_t>(cell >> 32),
      static_cast<std::uint32_t>(seed.replicate_id), static_cast<std::uint32_t>(seed.replicate_id >> 32)};
  const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed.master_seed),
                                         static_cast<std::uint32_t>(seed.master_seed >> 32)};
  const auto out = philox4x32(ctr, key);
  const std::uint64_t bits = ((static_cast<std::uint64_t>(out[0]) << 32) | out[1]) >> 11;
  const double u = (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
}

NoiseRealization::NoiseRealization(NoiseGrid grid, SeedSpec seed, std::vector<double> values)
    : grid_(grid), seed_(seed), values_(std::move(values)) {
  grid_.validate();
  if (static_cast<std::int64_t>(values_.size()) != grid_.cell_count()) {
    throw ValidationError("noise realization size does not match its grid");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw ValidationError("noise realization entries must be finite");
  }
}

std::span<const double> NoiseRealization::slab(std::int64_t n) const {
  const auto per = static_cast<std::size_t>(grid_.space_cells());
  return std::span<const double>(values_).subspan(static_cast<std::size_t>(n) * per, per);
}

double NoiseRealization::at(std::int64_t n, std::int64_t flat_mu) const {
  return values_[static_cast<std::size_t>(n * grid_.space_cells() + flat_mu)];
}

NoiseRealization NoiseRealization::scaled(double factor) const {
  std::vector<double> v = values_;
  for (double& x : v) x *= factor;
  return NoiseRealization(grid_, seed_, std::move(v));
}

NoiseRealization sample(const NoiseGrid& grid, const SeedSpec& seed) {
  grid.validate();
  const double sd = std::sqrt(grid.cell_volume());
  std::vector<double> values(static_cast<std::size_t>(grid.cell_count()));
  for (std::size_t k = 0; k < values.size(); ++k) values[k] = sd * counter_normal(seed, k);
  return NoiseRealization(grid, seed, std::move(values));
}

NoiseRealization zero_noise(const NoiseGrid& grid) {
  grid.validate();
  return NoiseRealization(grid, SeedSpec{}, std::vector<double>(static_cast<std::size_t>(grid.cell_count()), 0.0));
}

std::int64_t locate_cell(double coordinate, double lower, double upper, std::int64_t cells) {
  if (!(coordinate >= lower && coordinate <= upper)) throw ValidationError("point outside the noise domain");
  auto idx = static_cast<std::int64_t>(std::floor((coordinate - lower) / (upper - lower) * static_cast<double>(cells)));
  if (idx >= cells) idx = cells - 1;
  if (idx < 0) idx = 0;
  return idx;
}

double eval_What(const NoiseRealization& r, double t, std::span<const double> x) {
  const NoiseGrid& g = r.grid();
  if (static_cast<int>(x.size()) != g.d) throw ValidationError("eval_What: point has wrong dimension");
  const std::int64_t n = locate_cell(t, 0.0, g.T, g.n_time);
  std::int64_t flat = 0;
  for (int i = 0; i < g.d; ++i) flat = flat * g.j_space + locate_cell(x[static_cast<std::size_t>(i)], 0.0, 1.0, g.j_space);
  return r.at(n, flat) / g.cell_volume();
}

namespace {

// Visits every cell with its box [t0,t1] x prod [x0_i, x1_i].
template <class F>
void for_each_cell(const NoiseGrid& grid, F&& visit) {
  const std::int64_t per = grid.space_cells();
  std::array<double, kMaxDim> lo{};
  std::array<double, kMaxDim> hi{};
  for (std::int64_t n = 0; n < grid.n_time; ++n) {
    for (std::int64_t flat = 0; flat < per; ++flat) {
      std::int64_t rest = flat;
      for (int i = grid.d - 1; i >= 0; --i) {
        const std::int64_t j = rest % grid.j_space;
        rest /= grid.j_space;
        lo[static_cast<std::size_t>(i)] = grid.x_node(j);
        hi[static_cast<std::size_t>(i)] = grid.x_node(j + 1);
      }
      visit(n, flat, grid.t_node(n), grid.t_node(n + 1), lo, hi);
    }
  }
}

// Tensor Gauss integral of g over one space-time box.
double box_integral(const SpaceTimeFunction& g, int d, int points, double t0, double t1,
                    const std::array<double, kMaxDim>& lo, const std::array<double, kMaxDim>& hi) {
  const GaussRule& rule = gauss_legendre(points);
  const int q = rule.size();
  std::int64_t total = q;
  for (int i = 0; i < d; ++i) total *= q;
  std::array<double, kMaxDim> x{};
  PairwiseAccumulator acc;
  for (std::int64_t k = 0; k < total; ++k) {
    std::int64_t rest = k;
    double w = 1.0;
    for (int i = d - 1; i >= 0; --i) {
      const auto p = static_cast<std::size_t>(rest % q);
      rest /= q;
      const double half = 0.5 * (hi[static_cast<std::size_t>(i)] - lo[static_cast<std::size_t>(i)]);
      x[static_cast<std::size_t>(i)] = 0.5 * (hi[static_cast<std::size_t>(i)] + lo[static_cast<std::size_t>(i)]) + half * rule.nodes[p];
      w *= half * rule.weights[p];
    }
    const auto pt = static_cast<std::size_t>(rest);
    const double ht = 0.5 * (t1 - t0);
    const double t = 0.5 * (t1 + t0) + ht * rule.nodes[pt];
    w *= ht * rule.weights[pt];
    acc.add(w * g(t, std::span<const double>(x.data(), static_cast<std::size_t>(d))));
  }
  return acc.total();
}

}  // namespace

std::vector<double> project_pihat(const SpaceTimeFunction& g, const NoiseGrid& grid, int points) {
  grid.validate();
  if (points < 1) throw ValidationError("project_pihat: need at least one quadrature point");
  std::vector<double> means(static_cast<std::size_t>(grid.cell_count()));
  const double vol = grid.cell_volume();
  for_each_cell(grid, [&](std::int64_t n, std::int64_t flat, double t0, double t1, const auto& lo, const auto& hi) {
    means[static_cast<std::size_t>(n * grid.space_cells() + flat)] = box_integral(g, grid.d, points, t0, t1, lo, hi) / vol;
  });
  return means;
}

ItoPairResidual ito_pair_check(const NoiseRealization& r, const SpaceTimeFunction& g, int points) {
  const NoiseGrid& grid = r.grid();
  const std::vector<double> means = project_pihat(g, grid, points);
  PairwiseAccumulator lhs;
  PairwiseAccumulator scale;
  for (std::size_t k = 0; k < means.size(); ++k) {
    lhs.add(means[k] * r.values()[k]);
    scale.add(std::abs(means[k] * r.values()[k]));
  }
  PairwiseAccumulator rhs;
  for_each_cell(grid, [&](std::int64_t, std::int64_t, double t0, double t1, const auto& lo, const auto& hi) {
    const SpaceTimeFunction product = [&](double t, std::span<const double> x) {
      return g(t, x) * eval_What(r, t, x);
    };
    // Nodes of a Gauss rule are interior, so the pointwise W-hat is the one of this cell.
    rhs.add(box_integral(product, grid.d, points + 2, t0, t1, lo, hi));
  });
  ItoPairResidual out;
  out.lhs = lhs.total();
  out.rhs = rhs.total();
  out.residual = out.lhs - out.rhs;
  out.scale = scale.total();
  return out;
}

std::vector<SpectralField> noise_spectral_coeffs(const NoiseRealization& r, const SpectralCutoff& cutoff) {
  const NoiseGrid& grid = r.grid();
  cutoff.validate();
  if (cutoff.d != grid.d) throw ValidationError("cutoff dimension does not match the noise grid");
  Eigen::MatrixXd b1(cutoff.n_max, grid.j_space);
  for (int a = 1; a <= cutoff.n_max; ++a)
    for (std::int64_t j = 1; j <= grid.j_space; ++j) b1(a - 1, j - 1) = cell_integral_1d(a, j, grid.j_space);
  const std::array<const Eigen::MatrixXd*, 3> mats{&b1, &b1, &b1};
  const double inv_vol = 1.0 / grid.cell_volume();
  std::vector<SpectralField> out;
  out.reserve(static_cast<std::size_t>(grid.n_time));
  for (std::int64_t n = 0; n < grid.n_time; ++n) {
    std::vector<double> c = detail::apply_all_axes(r.slab(n), grid.d, detail::cube_shape(grid.d, grid.j_space), mats);
    for (double& v : c) v *= inv_vol;
    out.emplace_back(cutoff, std::move(c));
  }
  return out;
}

}  // namespace spde4
