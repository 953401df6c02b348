#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "eos/oracle.hpp"
#include "eos/trajectory.hpp"

namespace eos {

/// Sampled lower bounds on ‖∇³L‖_op (ρ₃) and on its Lipschitz constant (ρ₄).
struct RhoEstimate {
  double rho3 = 0.0;
  double rho4 = 0.0;
  int probes = 0;
};

/// Probe i draws unit v, w from a generator seeded by (seed, i); the ρ₃
/// candidate is ‖∇³L(v, w)‖ followed by a few symmetric power steps
/// v ← ∇³L(v, v)/‖·‖. ρ₄ compares contractions at θ and θ + radius·d for a
/// random unit d. Probes are a fixed sequence, so the estimates are
/// nondecreasing in n_probes.
RhoEstimate estimate_rho3_rho4(const LossOracle& oracle, const ParameterVector& theta, int n_probes,
                               double radius, std::uint64_t seed = 7);

struct DiagnosticsConfig {
  double eta = 0.01;
  long stride = 1;            // rows
  long expensive_stride = 10; // ρ̂₃, ρ̂₄, ratio_third, ratio_minres
  int n_probes = 16;
  double radius = 1e-3;
  std::uint64_t seed = 7;
  EigSolverConfig eig;
};

struct AssumptionRow {
  long t = 0;
  double alpha = 0.0;
  double eps = 0.0;
  double cosine = 0.0;
  double norm_grad_S_perp = 0.0;
  double rho3 = 0.0;
  double rho4 = 0.0;
  double ratio_third = 0.0;
  double ratio_hess = 0.0;
  double ratio_minres = 0.0;
  double lambda2_eta = 0.0;
};

struct AssumptionReport {
  std::vector<AssumptionRow> rows;
  bool no_progressive_sharpening = false;  // α_t ≤ 0 on every logged step
  int n_probes = 0;
};

AssumptionReport assumption_report(const RunLog& log, const LossOracle& oracle,
                                   const DiagnosticsConfig& cfg);

void write_assumptions_csv(std::ostream& out, const AssumptionReport& report);

struct CouplingSummary {
  long steps = 0;
  double max_loss_err = 0.0, mean_loss_err = 0.0;    // |L − pred_loss|·η/δ²
  double max_sharp_err = 0.0, mean_sharp_err = 0.0;  // |S − pred_sharp|·η
  double max_dev_err = 0.0, mean_dev_err = 0.0;      // ‖v − v*‖/δ
  double min_abs_x_star = 0.0;                       // min |x*|/δ
  double max_dev_norm = 0.0;                         // max ‖θ − θ†‖/δ
  std::optional<long> flow_overtake_step;  // first t with ‖θ − θ_flow‖ > 10‖θ − θ†‖
  std::optional<long> breakdown_step;
  double max_gen_sharp_err = 0.0;
};

CouplingSummary coupling_summary(const RunLog& log, double eta);

/// (s_t + s_{t−1})/2, with the first entry copied.
std::vector<double> two_step_average(const std::vector<double>& series);

}  // namespace eos
