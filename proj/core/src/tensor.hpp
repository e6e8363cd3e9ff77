#pragma once

// Mode products on dense d-way tensors stored row-major (axis 0 slowest).

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace spde4::detail {

using Shape = std::array<Eigen::Index, 3>;

/// out = A applied along `axis` of a tensor with `dims` axes and shape `shape`.
/// On return shape[axis] = A.rows().
std::vector<double> apply_axis(std::span<const double> data, int dims, Shape& shape, int axis,
                               const Eigen::MatrixXd& A);

/// Applies mats[i] along axis i for i < dims.
std::vector<double> apply_all_axes(std::span<const double> data, int dims, Shape shape,
                                   const std::array<const Eigen::MatrixXd*, 3>& mats);

/// Shape with n entries along each of the first `dims` axes.
inline Shape cube_shape(int dims, Eigen::Index n) {
  Shape s{1, 1, 1};
  for (int i = 0; i < dims; ++i) s[static_cast<std::size_t>(i)] = n;
  return s;
}

}  // namespace spde4::detail
