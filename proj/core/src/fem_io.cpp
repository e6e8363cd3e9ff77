#include <ostream>

#include <fmt/format.h>

#include "spde4/errors.hpp"
#include "spde4/fem.hpp"

namespace spde4 {

void export_matrix_coo(std::ostream& out, const SparseOperator& op) {
  const auto& A = op.matrix;
  for (Eigen::Index col = 0; col < A.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, col); it; ++it) {
      out << fmt::format("{} {} {:.17g}\n", it.row(), it.col(), it.value());
    }
  }
}

void write_grid_csv(std::ostream& out, const FemFunction& fh, int samples) {
  if (samples < 2) throw ValidationError("write_grid_csv: need at least two samples per axis");
  const int d = fh.space->dim();
  out << (d == 1 ? "x1,value\n" : d == 2 ? "x1,x2,value\n" : "x1,x2,x3,value\n");
  std::int64_t total = 1;
  for (int i = 0; i < d; ++i) total *= samples;
  std::array<double, kMaxDim> x{};
  for (std::int64_t k = 0; k < total; ++k) {
    std::int64_t rest = k;
    for (int i = d - 1; i >= 0; --i) {
      x[static_cast<std::size_t>(i)] = static_cast<double>(rest % samples) / (samples - 1);
      rest /= samples;
    }
    const double v = fh.evaluate(std::span<const double>(x.data(), static_cast<std::size_t>(d)));
    for (int i = 0; i < d; ++i) out << fmt::format("{:.17g},", x[static_cast<std::size_t>(i)]);
    out << fmt::format("{:.17g}\n", v);
  }
}

}  // namespace spde4
