#include <CLI11.hpp>
#include <iostream>

#include "eos/experiment.hpp"
#include "eos/selfcheck.hpp"

int main(int argc, char** argv) {
  CLI::App app{"eos-lab: edge-of-stability experiments (GD, constrained and predicted trajectories)"};
  app.require_subcommand(1);

  std::string config;
  auto* run = app.add_subcommand("run", "run one experiment config");
  run->add_option("config", config, "config file")->required()->check(CLI::ExistingFile);

  std::string dir;
  int jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "run every *.cfg in a directory");
  sweep->add_option("dir", dir, "directory of configs")->required()->check(CLI::ExistingDirectory);
  sweep->add_option("--jobs,-j", jobs, "parallel workers")->check(CLI::PositiveNumber);

  auto* check = app.add_subcommand("check", "run the built-in invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : eos::kExitConfig;
  }

  if (*run) return eos::run_config_file(config, std::cout);
  if (*sweep) return eos::sweep_directory(dir, jobs, std::cout);
  if (*check) return eos::run_self_check(std::cout) == 0 ? eos::kExitOk : eos::kExitFailure;
  return eos::kExitConfig;
}
