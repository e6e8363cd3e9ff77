#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace spde4::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitSolver = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitGuard = 3;
inline constexpr int kExitUsage = 64;

const std::vector<std::string>& subcommand_names();
std::string usage();

/// Output directory, with SPDE4_OUTPUT_DIR taking precedence over the config.
std::string resolve_output_dir(const RunConfig& config);

/// Runs config.subcommand and writes results.csv, manifest.txt, plot.gp and
/// timing.txt (plus study-specific files) into the output directory. Errors
/// are reported on `log`; the return value is the process exit status.
int run_subcommand(const RunConfig& config, std::ostream& log);

}  // namespace spde4::cli
