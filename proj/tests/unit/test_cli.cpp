#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "spde4/errors.hpp"

using namespace spde4;
using namespace spde4::cli;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("spde4-test-" + name);
  std::filesystem::remove_all(p);
  return p;
}

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "t.ini");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, DefaultsRoundTrip) {
  const RunConfig c;
  const std::string text = to_ini(c);
  EXPECT_EQ(parse(text), c);
  EXPECT_EQ(to_ini(parse(text)), text);
  EXPECT_NE(text.find("dof_threshold = 200000"), std::string::npos);
  EXPECT_NE(text.find("cutoff = 32"), std::string::npos);
}

TEST(Config, ParsesValuesAndComments) {
  const RunConfig c = parse(
      "# comment\n[problem]\n; another\nd = 3\nT=0.25\nw0 = 1, 2, 1\n\n[sweep]\nparameter = n_star\nvalues = 4, 8,16\n"
      "[seeds]\nmaster = 18446744073709551615\n");
  EXPECT_EQ(c.d, 3);
  EXPECT_DOUBLE_EQ(c.T, 0.25);
  EXPECT_EQ(c.w0_mode, (std::vector<int>{1, 2, 1}));
  EXPECT_EQ(c.values, (std::vector<double>{4, 8, 16}));
  EXPECT_EQ(c.master, 18446744073709551615ull);
  EXPECT_EQ(parse(to_ini(c)), c);
}

TEST(Config, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_of("[grids]\n\nbogus = 1\n"), "t.ini:3: unknown key 'bogus' in [grids]");
  EXPECT_NE(error_of("[nothing]\n").find("t.ini:1:"), std::string::npos);
  EXPECT_NE(error_of("d = 2\n").find("t.ini:1:"), std::string::npos);
  EXPECT_NE(error_of("[problem]\nd = 2\nd = 3\n").find("t.ini:3:"), std::string::npos);
  EXPECT_NE(error_of("[problem]\nd = two\n").find("t.ini:2:"), std::string::npos);
  EXPECT_NE(error_of("[problem\n").find("t.ini:1:"), std::string::npos);
  EXPECT_NE(error_of("[grids]\nsteps\n").find("t.ini:2:"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  std::ostringstream log;
  RunConfig c;
  c.directory = scratch("codes").string();
  c.subcommand = "nope";
  EXPECT_EQ(run_subcommand(c, log), kExitUsage);
  c.subcommand = "full-error";  // needs kind = mc
  EXPECT_EQ(run_subcommand(c, log), kExitValidation);
  c.subcommand = "modeling-error";
  c.n_star = 64;
  c.j_star = 64;
  c.cutoff = 4;
  EXPECT_EQ(run_subcommand(c, log), kExitGuard);
  c.cutoff = 32;
  c.n_star = 1;
  c.j_star = 1;
  c.elements = 0;
  EXPECT_EQ(run_subcommand(c, log), kExitValidation);
}

TEST(Cli, SingleCellModelingErrorRow) {
  RunConfig c;
  c.subcommand = "modeling-error";
  c.n_star = 1;
  c.j_star = 1;
  const auto dir = scratch("single");
  c.directory = dir.string();
  std::ostringstream log;
  ASSERT_EQ(run_subcommand(c, log), kExitOk) << log.str();
  const std::string csv = slurp(dir / "results.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "parameter,error2,ci_low,ci_high");
  std::istringstream rows(csv.substr(csv.find('\n') + 1));
  std::string line;
  int n = 0;
  while (std::getline(rows, line)) ++n;
  EXPECT_EQ(n, 1);
  for (const char* f : {"manifest.txt", "plot.gp", "timing.txt"}) EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  EXPECT_FALSE(std::filesystem::exists(dir / "rate.txt"));
}

TEST(Cli, RerunIsByteIdentical) {
  RunConfig c;
  c.subcommand = "compare-time-full";
  c.kind = "mc";
  c.replicates = 6;
  c.bootstrap_resamples = 50;
  c.T = 0.01;
  c.steps = 4;
  c.elements = 4;
  c.degree = 2;
  c.cutoff = 24;
  c.parameter = "steps";
  c.values = {2, 4, 8};
  const auto a = scratch("det-a");
  const auto b = scratch("det-b");
  std::ostringstream log;
  c.directory = a.string();
  ASSERT_EQ(run_subcommand(c, log), kExitOk) << log.str();
  c.directory = b.string();
  c.workers = 2;
  ASSERT_EQ(run_subcommand(c, log), kExitOk) << log.str();
  EXPECT_EQ(slurp(a / "results.csv"), slurp(b / "results.csv"));
  EXPECT_EQ(slurp(a / "plot.gp"), slurp(b / "plot.gp"));
}

TEST(Cli, RateFileForSweeps) {
  RunConfig c;
  c.subcommand = "time-error";
  c.T = 0.01;
  c.n_star = 64;
  c.j_star = 8;
  c.cutoff = 80;
  c.parameter = "steps";
  c.values = {4, 8, 16};
  const auto dir = scratch("rate");
  c.directory = dir.string();
  std::ostringstream log;
  ASSERT_EQ(run_subcommand(c, log), kExitOk) << log.str();
  const std::string rate = slurp(dir / "rate.txt");
  EXPECT_NE(rate.find("slope = "), std::string::npos);
  EXPECT_NE(rate.find("theory = 0.25"), std::string::npos);
}

TEST(Cli, OutputDirectoryEnvironmentOverride) {
  RunConfig c;
  c.subcommand = "series-check";
  c.directory = scratch("unused").string();
  const auto dir = scratch("env");
  ::setenv("SPDE4_OUTPUT_DIR", dir.c_str(), 1);
  EXPECT_EQ(resolve_output_dir(c), dir.string());
  std::ostringstream log;
  const int code = run_subcommand(c, log);
  ::unsetenv("SPDE4_OUTPUT_DIR");
  ASSERT_EQ(code, kExitOk) << log.str();
  EXPECT_TRUE(std::filesystem::exists(dir / "results.csv"));
  EXPECT_FALSE(std::filesystem::exists(c.directory));
  EXPECT_EQ(slurp(dir / "results.csv").substr(0, 21), "delta,sum,bound_ratio");
}
