#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>

#include <Eigen/Core>
#include <fmt/format.h>

#include "spde4/error_lab.hpp"
#include "spde4/errors.hpp"
#include "spde4/fem.hpp"
#include "spde4/noise.hpp"
#include "spde4/oracle.hpp"
#include "spde4/rates.hpp"
#include "spde4/series.hpp"

#ifndef SPDE4_VERSION
#define SPDE4_VERSION "unknown"
#endif

namespace spde4::cli {

namespace {

struct Row {
  double parameter = 0.0;
  double error2 = 0.0;
  double low = 0.0;
  double high = 0.0;
};

struct StudyOutput {
  std::string x_label;
  std::string header = "parameter,error2,ci_low,ci_high";
  std::vector<Row> rows;
  // Extra CSV column layout for commands whose rows are not error moments.
  std::vector<std::vector<double>> table;
  bool plot_root = true;
  std::vector<std::string> derived;
  std::optional<RateReport> rate;
  // Appended to rate.txt.
  std::string rate_extra;
  std::map<std::string, std::string> files;
};

std::string num(double v) { return fmt::format("{:.17g}", v); }

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

void validate_common(const RunConfig& c) {
  require(c.d >= 1 && c.d <= 3, "problem.d must be 1, 2 or 3");
  require(c.T > 0.0, "problem.T must be positive");
  require(c.n_star >= 1 && c.j_star >= 1, "grids.n_star and grids.j_star must be positive");
  require(c.degree >= 2 && c.degree <= 4, "grids.degree must be 2, 3 or 4");
  require(c.elements >= 1 && c.steps >= 1 && c.cutoff >= 1, "grids.elements, steps and cutoff must be positive");
  require(c.kind == "exact" || c.kind == "mc", "mode.kind must be 'exact' or 'mc'");
  require(c.replicates >= 2, "mode.replicates must be at least 2");
  require(c.bootstrap_resamples >= 2, "mode.bootstrap_resamples must be at least 2");
  require(c.workers >= 0, "mode.workers must be nonnegative");
  require(c.dof_threshold > 0 && c.eigen_threshold > 0 && c.max_quadrature_points > 0,
          "guards must be positive");
  require(c.iterative_tolerance > 0.0, "guards.iterative_tolerance must be positive");
  require(!c.directory.empty(), "output.directory must not be empty");
}

void require_kind(const RunConfig& c, const std::string& kind) {
  require(c.kind == kind, c.subcommand + " needs mode.kind = " + kind);
}

// Integer sweep values for a count parameter; the base value when unswept.
std::vector<std::int64_t> sweep_counts(const RunConfig& c, const std::vector<std::string>& allowed,
                                       std::int64_t base) {
  require(std::find(allowed.begin(), allowed.end(), c.parameter) != allowed.end(),
          c.subcommand + ": sweep.parameter '" + c.parameter + "' is not supported");
  if (c.parameter == "none") {
    require(c.values.empty(), "sweep.values given without a sweep parameter");
    return {base};
  }
  require(!c.values.empty(), "sweep.values must list the sweep levels");
  std::vector<std::int64_t> out;
  for (double v : c.values) {
    require(v >= 1.0 && v == std::floor(v) && v < 9.0e15, "sweep.values must be positive integers for " + c.parameter);
    out.push_back(static_cast<std::int64_t>(v));
  }
  return out;
}

McOptions mc_options(const RunConfig& c) {
  McOptions o;
  o.replicates = c.replicates;
  o.master_seed = c.master;
  o.bootstrap_resamples = c.bootstrap_resamples;
  o.workers = c.workers;
  return o;
}

FemOptions fem_options(const RunConfig& c) {
  FemOptions o;
  o.dof_threshold = static_cast<std::size_t>(c.dof_threshold);
  o.eigen_threshold = static_cast<std::size_t>(c.eigen_threshold);
  o.iterative_tolerance = c.iterative_tolerance;
  return o;
}

Row exact_row(double parameter, double value) { return {parameter, value, value, value}; }
Row mc_row(double parameter, const McEstimate& e) { return {parameter, e.mean, e.ci_low, e.ci_high}; }

void fit_if_possible(StudyOutput& out, double theory, double slack) {
  if (out.rows.size() < 3) return;
  ConvergenceStudy study;
  for (const auto& r : out.rows) {
    if (!(r.error2 > 0.0)) return;
    study.resolutions.push_back(r.parameter);
    study.errors.push_back(std::sqrt(r.error2));
  }
  out.rate = fit_rate(study, theory, slack);
}

double slack_for(const RunConfig& c) { return c.kind == "mc" ? 0.3 : 0.15; }

StudyOutput modeling_error(const RunConfig& c) {
  require_kind(c, "exact");
  StudyOutput out;
  const bool space = c.parameter == "j_star";
  const auto counts = sweep_counts(c, {"none", "n_star", "j_star"}, space ? c.j_star : c.n_star);
  out.x_label = space ? "dx" : "dt";
  const SpectralCutoff cutoff{c.d, c.cutoff};
  for (auto n : counts) {
    NoiseGrid grid{c.d, c.T, space ? c.n_star : n, space ? n : c.j_star};
    const double v = modeling_error_exact(grid, c.T, cutoff);
    out.rows.push_back(exact_row(space ? grid.dx() : grid.dt(), v));
    out.derived.push_back(fmt::format("grid = n_star {} j_star {}", grid.n_time, grid.j_space));
  }
  fit_if_possible(out, space ? (4.0 - c.d) / 2.0 : (4.0 - c.d) / 8.0, slack_for(c));
  return out;
}

StudyOutput time_error(const RunConfig& c) {
  require_kind(c, "exact");
  StudyOutput out;
  out.x_label = "dtau";
  const auto counts = sweep_counts(c, {"none", "steps"}, c.steps);
  const NoiseGrid grid{c.d, c.T, c.n_star, c.j_star};
  for (auto M : counts) {
    const auto partition = TimePartition::uniform(c.T, static_cast<int>(M));
    const auto all = timedisc_error_exact_all(grid, partition, SpectralCutoff{c.d, c.cutoff});
    out.rows.push_back(exact_row(partition.step(1), *std::max_element(all.begin(), all.end())));
    out.derived.push_back(fmt::format("steps = {}", M));
  }
  fit_if_possible(out, (4.0 - c.d) / 8.0, slack_for(c));
  return out;
}

StudyOutput semidiscrete_error(const RunConfig& c) {
  require_kind(c, "mc");
  StudyOutput out;
  out.x_label = "h";
  const auto counts = sweep_counts(c, {"none", "elements"}, c.elements);
  const NoiseGrid grid{c.d, c.T, c.n_star, c.j_star};
  const auto times = TimePartition::uniform(c.T, c.steps).nodes();
  for (auto K : counts) {
    FemDiscretization disc(c.d, c.degree, static_cast<int>(K), fem_options(c));
    const auto r = semidiscrete_error_mc(grid, disc, times, SpectralCutoff{c.d, c.cutoff}, mc_options(c));
    out.rows.push_back(mc_row(1.0 / static_cast<double>(K), r.linf));
    out.derived.push_back(fmt::format("elements = {} dofs = {} linf_sigma = {}", K, disc.space().dofs(), num(r.linf.sigma)));
  }
  fit_if_possible(out, nu(c.degree, c.d), slack_for(c));
  return out;
}

StudyOutput full_error(const RunConfig& c) {
  require_kind(c, "mc");
  StudyOutput out;
  const bool time = c.parameter == "steps";
  out.x_label = time ? "dtau" : "h";
  const auto counts = sweep_counts(c, {"none", "elements", "steps"}, time ? c.steps : c.elements);
  const NoiseGrid grid{c.d, c.T, c.n_star, c.j_star};
  for (auto v : counts) {
    const int K = time ? c.elements : static_cast<int>(v);
    const int M = time ? static_cast<int>(v) : c.steps;
    FemDiscretization disc(c.d, c.degree, K, fem_options(c));
    const auto partition = TimePartition::uniform(c.T, M);
    const auto r = fulldisc_error_mc(grid, disc, partition, SpectralCutoff{c.d, c.cutoff}, mc_options(c));
    out.rows.push_back(mc_row(time ? partition.step(1) : 1.0 / K, r.l2t));
    out.derived.push_back(fmt::format("elements = {} steps = {} l2t_sigma = {} linf = {}", K, M, num(r.l2t.sigma),
                                      num(r.linf.mean)));
  }
  fit_if_possible(out, time ? (4.0 - c.d) / 8.0 : nu(c.degree, c.d), slack_for(c));
  return out;
}

StudyOutput compare_time_full(const RunConfig& c) {
  require_kind(c, "mc");
  StudyOutput out;
  const bool space = c.parameter == "elements";
  out.x_label = space ? "h" : "dtau";
  const auto counts = sweep_counts(c, {"none", "steps", "elements"}, space ? c.elements : c.steps);
  const NoiseGrid grid{c.d, c.T, c.n_star, c.j_star};
  for (auto v : counts) {
    const int K = space ? static_cast<int>(v) : c.elements;
    const int M = space ? c.steps : static_cast<int>(v);
    FemDiscretization disc(c.d, c.degree, K, fem_options(c));
    const auto partition = TimePartition::uniform(c.T, M);
    const auto r = timedisc_vs_fulldisc_mc(grid, disc, partition, SpectralCutoff{c.d, c.cutoff}, mc_options(c));
    out.rows.push_back(mc_row(space ? 1.0 / K : partition.step(1), r.linf));
    out.derived.push_back(fmt::format("elements = {} steps = {} linf_sigma = {}", K, M, num(r.linf.sigma)));
  }
  if (space) {
    fit_if_possible(out, nu(c.degree, c.d), slack_for(c));
  } else if (out.rows.size() > 1) {
    double lo = out.rows.front().error2;
    double hi = lo;
    for (const auto& r : out.rows) {
      lo = std::min(lo, r.error2);
      hi = std::max(hi, r.error2);
    }
    out.derived.push_back("relative_variation = " + num(lo > 0.0 ? (hi - lo) / lo : 0.0));
  }
  return out;
}

SpectralField initial_mode(const RunConfig& c) {
  require(static_cast<int>(c.w0_mode.size()) == c.d, "problem.w0 needs one index per dimension");
  int n = 1;
  for (int a : c.w0_mode) {
    require(a >= 1, "problem.w0 indices must be positive");
    n = std::max(n, a);
  }
  SpectralField w0(SpectralCutoff{c.d, n});
  w0.at(MultiIndex(std::span<const int>(c.w0_mode))) = 1.0;
  return w0;
}

StudyOutput det_convergence(const RunConfig& c) {
  require(c.parameter == "elements", "det-convergence needs sweep.parameter = elements");
  StudyOutput out;
  out.x_label = "h";
  std::vector<int> elements;
  for (auto K : sweep_counts(c, {"elements"}, c.elements)) elements.push_back(static_cast<int>(K));
  require(elements.size() >= 3, "det-convergence needs at least three element counts");
  const DetFemStudy s = det_fem_study(initial_mode(c), c.degree, elements, TimePartition::uniform(c.T, c.steps));
  std::string fd = "parameter,error2,ci_low,ci_high\n";
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const double e = s.semidiscrete.errors[i];
    out.rows.push_back(exact_row(s.semidiscrete.resolutions[i], e * e));
    const double f = s.fully_discrete.errors[i];
    fd += fmt::format("{},{},{},{}\n", num(s.fully_discrete.resolutions[i]), num(f * f), num(f * f), num(f * f));
  }
  out.files["results_fully_discrete.csv"] = fd;
  out.rate = s.semidiscrete_rate;
  const auto& r = s.fully_discrete_rate;
  out.rate_extra = fmt::format("fully_discrete_slope = {}\nfully_discrete_residual = {}\nfully_discrete_pass = {}\n",
                               num(r.slope), num(r.residual), r.pass ? "true" : "false");
  return out;
}

StudyOutput series_check(const RunConfig& c) {
  StudyOutput out;
  out.x_label = "delta";
  out.header = "delta,sum,bound_ratio";
  out.plot_root = false;
  std::vector<double> deltas;
  if (c.parameter == "none") {
    require(c.values.empty(), "sweep.values given without a sweep parameter");
    for (int k = 1; k <= 6; ++k) deltas.push_back(std::pow(10.0, -k));
  } else {
    require(c.parameter == "delta", "series-check sweeps only 'delta'");
    deltas = c.values;
  }
  const double tail = biharmonic_tail_majorant(c.d, c.cutoff);
  for (double delta : deltas) {
    require(delta > 0.0, "series-check: delta must be positive");
    const double sum = series_lemma_A2(c.d, delta, c.cutoff);
    const double ratio = sum / (p_d(c.d, std::pow(delta, 0.25)) * std::pow(delta, (4.0 - c.d) / 4.0));
    out.table.push_back({delta, sum, ratio});
  }
  out.derived.push_back("tail_bound = " + num(tail));
  return out;
}

StudyOutput sample_path(const RunConfig& c, const std::filesystem::path& dir) {
  require(c.parameter == "none", "sample-path does not sweep");
  StudyOutput out;
  out.x_label = "t";
  out.header = "time,uhat_norm2,fem_norm2,difference_norm2";
  out.plot_root = false;
  const NoiseGrid grid{c.d, c.T, c.n_star, c.j_star};
  const NoiseRealization r = sample(grid, SeedSpec{c.master, 0});
  const auto partition = TimePartition::uniform(c.T, c.steps);
  const SpectralCutoff cutoff{c.d, c.cutoff};
  FemDiscretization disc(c.d, c.degree, c.elements, fem_options(c));
  const FemPath fem = fully_discrete_path(disc, r, partition);
  const SpectralPath uhat = uhat_path(r, partition.nodes(), cutoff);
  const FemSpectralComparator compare(disc.space_ptr(), cutoff, static_cast<std::size_t>(c.max_quadrature_points));
  for (int m = 0; m <= partition.steps(); ++m) {
    const auto& s = uhat.states[static_cast<std::size_t>(m)];
    const auto& f = fem.states[static_cast<std::size_t>(m)];
    out.table.push_back({partition.node(m), inner_product(s, s), std::pow(l2_norm(disc, f.coeffs), 2),
                         compare.squared_error(f.coeffs, s)});
  }
  {
    std::ofstream bin(dir / "noise.bin", std::ios::binary);
    write_binary(bin, r);
  }
  std::ostringstream grid_csv;
  write_grid_csv(grid_csv, fem.states.back(), c.d == 3 ? 9 : 33);
  out.files["fem_final.csv"] = grid_csv.str();
  out.derived.push_back("replicate = 0");
  return out;
}

std::string plot_script(const StudyOutput& out, const std::string& subcommand) {
  std::string s;
  s += "set datafile separator ','\n";
  s += "set key autotitle columnhead\n";
  s += "set logscale x\n";
  s += out.plot_root || subcommand == "series-check" ? "set logscale y\n" : "";
  s += "set xlabel '" + out.x_label + "'\n";
  s += "set terminal pngcairo size 800,600\n";
  s += "set output 'plot.png'\n";
  if (subcommand == "series-check") {
    s += "set ylabel 'sum / (p_d(delta^(1/4)) delta^((4-d)/4))'\n";
    s += "plot 'results.csv' using 1:3 with linespoints title 'bound ratio'\n";
  } else if (subcommand == "sample-path") {
    s += "unset logscale x\n";
    s += "set ylabel 'squared L2 norm'\n";
    s += "plot 'results.csv' using 1:2 with lines title 'u-hat', '' using 1:3 with lines title 'FEM'\n";
  } else {
    s += "set ylabel 'root mean square error'\n";
    s += "plot 'results.csv' using 1:(sqrt($2)) with linespoints title '" + subcommand + "', \\\n";
    s += "     '' using 1:(sqrt($3)):(sqrt($4)) with yerrorbars notitle\n";
  }
  return s;
}

std::string manifest(const RunConfig& c, const StudyOutput& out) {
  std::string m;
  m += "spde4 " SPDE4_VERSION "\n";
  m += "subcommand = " + c.subcommand + "\n";
  m += fmt::format("eigen = {}.{}.{}\n", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION);
  m += "tail_tolerance = " + num(kTailTolerance) + "\n";
  m += "seed_master = " + std::to_string(c.master) + "\n";
  m += "cutoff = " + std::to_string(c.cutoff) + "\n";
  m += "\n# config (canonical)\n" + to_ini(c) + "\n# derived\n";
  for (const auto& line : out.derived) m += line + "\n";
  return m;
}

std::string rate_text(const StudyOutput& out) {
  const auto& r = *out.rate;
  std::string t = fmt::format(
      "slope = {}\nintercept = {}\nresidual = {}\nleave_one_out_spread = {}\ncoarsest_excluded = {}\n"
      "theory = {}\nslack = {}\npass = {}\n",
      num(r.slope), num(r.intercept), num(r.residual), num(r.leave_one_out_spread),
      r.coarsest_excluded ? "true" : "false", num(r.theory), num(r.slack), r.pass ? "true" : "false");
  return t + out.rate_extra;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + path.string());
  f << text;
  if (!f) throw ValidationError("failed writing " + path.string());
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names{"sample-path",       "modeling-error",  "time-error",
                                              "semidiscrete-error", "full-error",      "compare-time-full",
                                              "det-convergence",   "series-check"};
  return names;
}

std::string usage() {
  std::string s = "usage: spde4 <subcommand> <config.ini>\n\nsubcommands:\n";
  for (const auto& n : subcommand_names()) s += "  " + n + "\n";
  s += "\nThe output directory comes from [output] directory unless SPDE4_OUTPUT_DIR is set.\n";
  return s;
}

std::string resolve_output_dir(const RunConfig& config) {
  if (const char* env = std::getenv("SPDE4_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return config.directory;
}

int run_subcommand(const RunConfig& config, std::ostream& log) {
  const auto& names = subcommand_names();
  if (std::find(names.begin(), names.end(), config.subcommand) == names.end()) {
    log << "unknown subcommand '" << config.subcommand << "'\n" << usage();
    return kExitUsage;
  }
  const auto start = std::chrono::steady_clock::now();
  try {
    validate_common(config);
    const std::filesystem::path dir = resolve_output_dir(config);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ValidationError("cannot create output directory " + dir.string() + ": " + ec.message());

    StudyOutput out;
    const std::string& s = config.subcommand;
    if (s == "modeling-error") out = modeling_error(config);
    else if (s == "time-error") out = time_error(config);
    else if (s == "semidiscrete-error") out = semidiscrete_error(config);
    else if (s == "full-error") out = full_error(config);
    else if (s == "compare-time-full") out = compare_time_full(config);
    else if (s == "det-convergence") out = det_convergence(config);
    else if (s == "series-check") out = series_check(config);
    else out = sample_path(config, dir);

    std::string csv = out.header + "\n";
    for (const auto& r : out.rows) csv += fmt::format("{},{},{},{}\n", num(r.parameter), num(r.error2), num(r.low), num(r.high));
    for (const auto& row : out.table) {
      for (std::size_t i = 0; i < row.size(); ++i) csv += (i ? "," : "") + num(row[i]);
      csv += "\n";
    }
    write_file(dir / "results.csv", csv);
    write_file(dir / "manifest.txt", manifest(config, out));
    write_file(dir / "plot.gp", plot_script(out, s));
    for (const auto& [name, text] : out.files) write_file(dir / name, text);
    if (out.rate) write_file(dir / "rate.txt", rate_text(out));
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_file(dir / "timing.txt", fmt::format("wall_seconds = {:.3f}\n", seconds));
    if (out.rate) log << fmt::format("{}: slope {:.4f} (theory {:.4f}, slack {:.2f}) {}\n", s, out.rate->slope,
                                     out.rate->theory, out.rate->slack, out.rate->pass ? "ok" : "below theory");
    log << s << ": wrote " << dir.string() << "\n";
    return kExitOk;
  } catch (const ValidationError& e) {
    log << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const GuardRefusal& e) {
    log << "refused: " << e.what() << "\n";
    return kExitGuard;
  } catch (const SolverError& e) {
    log << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  }
}

}  // namespace spde4::cli
