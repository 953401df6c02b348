#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "eos/diagnostics.hpp"
#include "eos/losses.hpp"
#include "eos/trajectory.hpp"

namespace eos {

struct OdeSweepSpec {
  bool enabled = false;
  double alpha = 1.0;
  double beta = 1.0;
  std::vector<double> x0_fracs{1e-3, 1e-2, 0.1, 0.5};  // X(0)/δ
  double h = 1e-3;
  double t_end = 0.0;  // 0: integrate each orbit until it closes
  std::size_t stride = 10;
};

/// Fully parsed experiment. Relative paths are resolved against the
/// directory of the config file.
struct ExperimentConfig {
  std::string name = "run";
  std::uint64_t seed = 0;
  bool has_loss = false;
  LossSpec loss;
  RunConfig run;
  std::vector<double> init_theta;  // explicit θ_init; empty: family default
  double init_x_frac = 0.01;       // toy families: θ_init = (x·δ, 0, 0)
  DiagnosticsConfig diagnostics;
  OdeSweepSpec ode;
  std::filesystem::path output_dir;
  std::string source_text;

  void validate() const;
};

/// Parses INI text ([section] / key = value, '#' or ';' comments). Unknown
/// sections or keys are ConfigErrors.
ExperimentConfig parse_config(const std::string& text,
                              const std::filesystem::path& base_dir = std::filesystem::path("."));

ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace eos
