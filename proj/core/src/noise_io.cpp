#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "spde4/errors.hpp"
#include "spde4/noise.hpp"

namespace spde4 {

namespace {

template <class U>
void put_le(std::ostream& out, U value) {
  char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFFu);
  out.write(bytes, sizeof(U));
}

template <class U>
U get_le(std::istream& in) {
  unsigned char bytes[sizeof(U)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(U));
  if (!in) throw ValidationError("noise file truncated");
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

}  // namespace

void write_binary(std::ostream& out, const NoiseRealization& r) {
  const NoiseGrid& g = r.grid();
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.d));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.n_time));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.j_space));
  put_le<std::uint32_t>(out, 0u);
  put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(g.T));
  put_le<std::uint64_t>(out, r.seed().master_seed);
  put_le<std::uint64_t>(out, r.seed().replicate_id);
  for (double v : r.values()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw ValidationError("failed writing noise realization");
}

NoiseRealization read_binary(std::istream& in) {
  NoiseGrid g;
  g.d = static_cast<int>(get_le<std::uint32_t>(in));
  g.n_time = get_le<std::uint32_t>(in);
  g.j_space = get_le<std::uint32_t>(in);
  if (get_le<std::uint32_t>(in) != 0u) throw ValidationError("noise file: reserved header field is not zero");
  g.T = std::bit_cast<double>(get_le<std::uint64_t>(in));
  g.validate();
  SeedSpec seed;
  seed.master_seed = get_le<std::uint64_t>(in);
  seed.replicate_id = get_le<std::uint64_t>(in);
  std::vector<double> values(static_cast<std::size_t>(g.cell_count()));
  for (double& v : values) v = std::bit_cast<double>(get_le<std::uint64_t>(in));
  return NoiseRealization(g, seed, std::move(values));
}

void write_csv(std::ostream& out, const NoiseRealization& r, std::int64_t max_cells) {
  const NoiseGrid& g = r.grid();
  if (g.cell_count() > max_cells) throw GuardRefusal("noise grid too large for CSV export");
  out << "n";
  for (int i = 1; i <= g.d; ++i) out << ",mu_" << i;
  out << ",R\n";
  const std::int64_t per = g.space_cells();
  for (std::int64_t n = 0; n < g.n_time; ++n) {
    for (std::int64_t flat = 0; flat < per; ++flat) {
      out << (n + 1);
      std::int64_t idx[3] = {0, 0, 0};
      std::int64_t rest = flat;
      for (int i = g.d - 1; i >= 0; --i) {
        idx[i] = rest % g.j_space + 1;
        rest /= g.j_space;
      }
      for (int i = 0; i < g.d; ++i) out << ',' << idx[i];
      out << ',' << fmt::format("{:.17g}", r.at(n, flat)) << '\n';
    }
  }
}

}  // namespace spde4
