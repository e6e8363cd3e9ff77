#pragma once

// Study configuration: INI-like text with sections and `key = value` lines.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace spde4::cli {

struct RunConfig {
  std::string subcommand;

  // [problem]
  int d = 2;
  double T = 0.1;
  std::vector<int> w0_mode{1, 1};

  // [grids]
  std::int64_t n_star = 4;
  std::int64_t j_star = 4;
  int degree = 3;
  int elements = 8;
  int steps = 16;
  int cutoff = 32;

  // [sweep]
  std::string parameter = "none";
  std::vector<double> values;

  // [mode]
  std::string kind = "exact";
  int replicates = 200;
  int bootstrap_resamples = 1000;
  int workers = 1;

  // [seeds]
  std::uint64_t master = 20240601;

  // [guards]
  std::int64_t dof_threshold = 200000;
  std::int64_t eigen_threshold = 4000;
  double iterative_tolerance = 1e-11;
  std::int64_t max_quadrature_points = 20000000;

  // [output]
  std::string directory = "spde4-out";

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses a config; errors carry `source:line`. Unknown sections or keys and
/// repeated keys are rejected. The subcommand is not part of the file.
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Canonical text of every key in a fixed order; parse_config(to_ini(c)) == c
/// up to the subcommand, and to_ini is a fixed point of that round trip.
std::string to_ini(const RunConfig& config);

}  // namespace spde4::cli
