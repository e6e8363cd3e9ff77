#include "spde4/errors.hpp"
#include "spde4/fem.hpp"

namespace spde4 {

FemPath fully_discrete_path(const FemDiscretization& disc, const NoiseRealization& r,
                            const TimePartition& partition) {
  if (r.grid().d != disc.space().dim()) throw ValidationError("noise grid dimension does not match the FEM space");
  const auto overlaps = step_overlaps(r.grid(), partition);
  const Eigen::MatrixXd loads = disc.noise_loads(r);
  FemPath path;
  path.times = partition.nodes();
  path.provenance = {r.seed().master_seed, r.seed().replicate_id, "fully-discrete Backward Euler FEM"};
  path.nonuniform = !partition.is_uniform();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(disc.space().dofs()));
  path.states.push_back(disc.make_function(c));
  for (int m = 1; m <= partition.steps(); ++m) {
    Eigen::VectorXd rhs = disc.mass().matrix * c;
    for (const auto& [n, o] : overlaps[static_cast<std::size_t>(m - 1)]) rhs += o * loads.col(static_cast<Eigen::Index>(n));
    c = disc.solve_step(partition.step(m), rhs);
    path.states.push_back(disc.make_function(c));
  }
  return path;
}

FemPath deterministic_fd_path(const FemDiscretization& disc, const SpectralField& w0,
                              const TimePartition& partition) {
  FemPath path;
  path.times = partition.nodes();
  path.provenance.description = "deterministic fully-discrete Backward Euler FEM";
  path.nonuniform = !partition.is_uniform();
  Eigen::VectorXd c = l2_project(disc, w0).coeffs;
  path.states.push_back(disc.make_function(c));
  for (int m = 1; m <= partition.steps(); ++m) {
    c = disc.solve_step(partition.step(m), disc.mass().matrix * c);
    path.states.push_back(disc.make_function(c));
  }
  return path;
}

}  // namespace spde4
