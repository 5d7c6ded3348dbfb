#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "osp/cli/commands.hpp"
#include "osp/cli/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Discounted optimal stopping: thresholds, value functions and simulation checks.\n"
               "Worker threads for simulation: OSP_WORKERS (default: hardware concurrency)."};
  app.require_subcommand(1);

  std::string config;
  auto* solve = app.add_subcommand("solve", "Solve and write the solution artifacts");
  solve->add_option("config", config, "Problem config (INI)")->required();

  std::string grid_text;
  std::optional<double> at;
  auto* value = app.add_subcommand("value", "Value function by every available route, as CSV");
  value->add_option("config", config, "Problem config (INI)")->required();
  auto* grid_opt = value->add_option("--grid", grid_text, "Evaluation grid lo:hi:n");
  value->add_option("--at", at, "Single point (chains: state label)")->excludes(grid_opt);

  std::optional<std::size_t> paths;
  std::optional<std::uint64_t> seed;
  auto* verify = app.add_subcommand("verify", "Solve, then run the Monte Carlo checks");
  verify->add_option("config", config, "Problem config (INI)")->required();
  verify->add_option("--paths", paths, "Paths per policy evaluation");
  verify->add_option("--seed", seed, "Base random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : osp::cli::kInvalidConfig;
  }

  if (*solve) return osp::cli::cmd_solve(config, std::cout, std::cerr);
  if (*value) {
    std::optional<osp::cli::Grid> grid;
    if (!grid_text.empty()) {
      try {
        grid = osp::cli::parse_grid(grid_text);
      } catch (const osp::cli::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return osp::cli::kInvalidConfig;
      }
    }
    return osp::cli::cmd_value(config, grid, at, std::cout, std::cerr);
  }
  return osp::cli::cmd_verify(config, paths, seed, std::cout, std::cerr);
}
