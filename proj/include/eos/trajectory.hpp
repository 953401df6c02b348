#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eos/error.hpp"
#include "eos/oracle.hpp"
#include "eos/predicted.hpp"
#include "eos/spectral.hpp"

namespace eos {

struct RunConfig {
  double eta = 0.01;
  long max_steps = 1000;          // steps after the time shift
  long max_phase1_steps = 10000;  // plain GD steps allowed before instability
  double stop_lambda2_frac = 1.9;
  int projection_substeps = 3;
  int flow_substeps = 4;
  double margin = 0.05;
  EigSolverConfig eig;

  bool run_flow = true;
  bool run_predicted = true;
  bool run_generalized = false;
  long closed_form_stride = 50;  // 0 disables the unfolded-sum check
  std::size_t profile_samples = 41;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

ParameterVector gd_step(const LossOracle& oracle, const ParameterVector& theta, double eta);

/// RK4 for dθ/ds = −∇L(θ) over s ∈ [0, η].
ParameterVector flow_step(const LossOracle& oracle, const ParameterVector& theta, double eta,
                          int substeps);

struct Projection {
  ParameterVector theta;
  SpectralInfo spectral;
};

/// Linearized projection onto {S = 2/η, u·∇L = 0}: `rounds` rounds of
/// eigen-refresh, sharpness correction along ∇S and a Newton step along u
/// (rounds ≤ 0 means cfg.projection_substeps). Up to 10 further rounds run while
/// the residuals exceed tolerance; throws ProjectionDiverged if they still do.
Projection project_to_manifold(const LossOracle& oracle, const ParameterVector& theta,
                               const RunConfig& cfg, const SpectralInfo* prev = nullptr,
                               int rounds = 0);

/// Newton steps along u only; used to probe for instability without forcing S.
Projection newton_u_projection(const LossOracle& oracle, const ParameterVector& theta,
                               const RunConfig& cfg, const SpectralInfo* prev = nullptr);

Projection constrained_step(const LossOracle& oracle, const ParameterVector& theta_dagger,
                            const RunConfig& cfg, const SpectralInfo& prev);

/// |S − 2/η|/(2/η) and |u·∇L|/‖∇L‖ at a projected point.
std::pair<double, double> manifold_residuals(const LossOracle& oracle, const ParameterVector& theta,
                                             const SpectralInfo& spectral, double eta);

struct TrajectoryRecord {
  long t = 0;  // negative before the instability
  ParameterVector theta;
  ParameterVector theta_dagger;  // empty before t = 0
  double loss = 0.0;
  double sharpness = 0.0;  // S(θ_t)
  double probe_sharpness = 0.0;  // phase 1 only: S after the Newton-in-u probe, NaN if not probed
  double loss_dagger = 0.0;
  SpectralInfo spectral;  // at θ†_t
  TaylorQuantities tq;    // at θ†_t
  double x = 0.0;
  double y = 0.0;
  double dev_norm = 0.0;
  double s_residual = 0.0;
  double u_residual = 0.0;
  bool alpha_nonpositive = false;

  double loss_flow = 0.0;
  double dev_flow = 0.0;  // ‖θ_t − θ_flow,t‖

  double x_star = 0.0, y_star = 0.0, pred_loss = 0.0, pred_sharp = 0.0, dev_pred = 0.0;
  double gen_x_star = 0.0, gen_y_star = 0.0, gen_pred_loss = 0.0, gen_pred_sharp = 0.0;
  double y_star_closed_form = 0.0;  // NaN off the stride
  ParameterVector v_star;           // empty once the prediction has broken down
};

struct RunError {
  ErrorKind kind;
  std::string message;
  long step;
};

struct RunLog {
  std::vector<TrajectoryRecord> records;
  bool reached_instability = false;
  std::string stop_reason;  // max_steps | lambda2 | stable | error
  std::optional<RunError> error;
  std::optional<long> predicted_breakdown_step;
  std::optional<long> generalized_breakdown_step;
  long dagger_descent_violations = 0;
  ParameterVector v0;

  /// Records with t ≥ 0.
  std::vector<const TrajectoryRecord*> phase2() const;
};

/// Phase 1 (plain GD until the projected sharpness reaches 2/η) followed by
/// the coupled Phase 2 run. Errors are caught and returned in the log.
RunLog run_experiment(const LossOracle& oracle, const ParameterVector& theta_init,
                      const RunConfig& cfg);

}  // namespace eos
