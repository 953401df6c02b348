#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "eos/config.hpp"
#include "eos/diagnostics.hpp"
#include "eos/ode.hpp"
#include "eos/trajectory.hpp"

namespace eos {

/// Sub-seeds drawn in a fixed order from one mt19937_64 seeded with master.
struct SeedPlan {
  std::uint64_t master = 0;
  std::uint64_t data = 0;
  std::uint64_t init = 0;
  std::uint64_t solver = 0;
  std::uint64_t diagnostics = 0;
};

SeedPlan derive_seeds(std::uint64_t master);

/// EOS_LAB_SEED when set (ConfigError if malformed), else the config seed.
std::uint64_t effective_seed(const ExperimentConfig& cfg);

/// SHA-1 of "blob <size>\0<text>", the object id git assigns to the file.
std::string config_hash(const std::string& text);

/// Stage tag 1..4 per record; rows without x/y carry the previous tag.
std::vector<int> label_phases(const RunLog& log);

struct OdeOrbit {
  double x0_frac = 0.0;
  std::vector<OdeState> states;
  double h = 0.0;
  bool closed = false;
  double period = 0.0;
};

std::vector<OdeOrbit> run_ode_sweep(const OdeSweepSpec& spec);

/// Edge-of-stability statistics over the trailing window of phase 2.
struct HoverStats {
  long window = 0;
  double min_ratio = 0.0;  // min S(θ)·η/2
  double max_ratio = 0.0;
  double mean_ratio = 0.0;
  bool within_10pct = false;
};

HoverStats hover_stats(const RunLog& log, double eta, long window = 500);

struct ExperimentResult {
  ExperimentConfig config;
  SeedPlan seeds;
  std::string hash;
  bool ran_trajectory = false;
  RunLog log;
  std::vector<int> phases;
  AssumptionReport assumptions;
  CouplingSummary coupling;
  HoverStats hover;
  std::vector<OdeOrbit> orbits;
};

/// Builds the oracle and initial point and runs everything the config asks for.
ExperimentResult run_experiment_config(const ExperimentConfig& cfg);

void write_run_csv(std::ostream& out, const ExperimentResult& result);
void write_ode_csv(std::ostream& out, const ExperimentResult& result);
void write_summary_json(std::ostream& out, const ExperimentResult& result);

/// Exit codes of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitConfig = 2, kExitAborted = 3 };

/// Loads, runs and writes all outputs of one config; returns the exit code.
int run_config_file(const std::filesystem::path& path, std::ostream& msg);

/// Runs every *.cfg in dir (sorted by name) on up to `jobs` threads.
int sweep_directory(const std::filesystem::path& dir, int jobs, std::ostream& msg);

}  // namespace eos
