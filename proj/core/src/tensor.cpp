#include "tensor.hpp"

namespace spde4::detail {

std::vector<double> apply_axis(std::span<const double> data, int dims, Shape& shape, int axis,
                               const Eigen::MatrixXd& A) {
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Index pre = 1;
  Eigen::Index post = 1;
  for (int i = 0; i < axis; ++i) pre *= shape[static_cast<std::size_t>(i)];
  for (int i = axis + 1; i < dims; ++i) post *= shape[static_cast<std::size_t>(i)];
  const Eigen::Index n_in = shape[static_cast<std::size_t>(axis)];
  const Eigen::Index n_out = A.rows();
  std::vector<double> out(static_cast<std::size_t>(pre * n_out * post));
  for (Eigen::Index p = 0; p < pre; ++p) {
    Eigen::Map<const RowMat> in_block(data.data() + p * n_in * post, n_in, post);
    Eigen::Map<RowMat> out_block(out.data() + p * n_out * post, n_out, post);
    out_block.noalias() = A * in_block;
  }
  shape[static_cast<std::size_t>(axis)] = n_out;
  return out;
}

std::vector<double> apply_all_axes(std::span<const double> data, int dims, Shape shape,
                                   const std::array<const Eigen::MatrixXd*, 3>& mats) {
  std::vector<double> current(data.begin(), data.end());
  for (int axis = 0; axis < dims; ++axis) {
    current = apply_axis(current, dims, shape, axis, *mats[static_cast<std::size_t>(axis)]);
  }
  return current;
}

}  // namespace spde4::detail
