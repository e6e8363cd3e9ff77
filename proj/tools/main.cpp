#include <iostream>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "spde4/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Error studies for the stochastic linearized Cahn-Hilliard problem"};
  std::string subcommand;
  std::string config_path;
  bool echo = false;
  app.add_option("subcommand", subcommand, "study to run")->required();
  app.add_option("config", config_path, "INI study configuration");
  app.add_flag("--echo-config", echo, "print the canonical configuration and exit");
  app.footer(spde4::cli::usage());
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : spde4::cli::kExitUsage;
  }

  const auto& names = spde4::cli::subcommand_names();
  if (std::find(names.begin(), names.end(), subcommand) == names.end()) {
    std::cerr << "unknown subcommand '" << subcommand << "'\n" << spde4::cli::usage();
    return spde4::cli::kExitUsage;
  }
  spde4::cli::RunConfig config;
  if (!config_path.empty()) {
    try {
      config = spde4::cli::load_config(config_path);
    } catch (const spde4::ValidationError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return spde4::cli::kExitValidation;
    }
  }
  config.subcommand = subcommand;
  if (echo) {
    std::cout << spde4::cli::to_ini(config);
    return 0;
  }
  return spde4::cli::run_subcommand(config, std::cerr);
}
