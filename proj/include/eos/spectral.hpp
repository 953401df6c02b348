#pragma once

#include <cstdint>
#include <functional>
#include <utility>

#include "eos/oracle.hpp"
#include "eos/vector.hpp"

namespace eos {

struct EigSolverConfig {
  int max_iters = 10000;
  double tol = 1e-9;      // relative residual ‖Hu − λu‖ ≤ tol·max(1, |λ|)
  bool deflation = true;  // also solve for λ₂ and reject a non-unique top eigenvalue
  double second_tol = 1e-6;  // residual tolerance for λ₂ inside spectral_info
  // Every ritz_window power steps, restart from the top Ritz vector of the span
  // of the last iterates (no extra Hessian products). < 2 disables it.
  int ritz_window = 8;
  std::uint64_t seed = 0x5eed;
};

struct EigenPair {
  double value = 0.0;
  ParameterVector vector;
  int iterations = 0;
};

/// Sharpness data at one point. grad_sharpness is always ∇³L(u, u).
struct SpectralInfo {
  double sharpness = 0.0;
  ParameterVector u;
  double lambda2 = 0.0;
  ParameterVector grad_sharpness;
  ParameterVector u2;  // second eigenvector, kept as a warm start
};

using LinearOperator = std::function<ParameterVector(const ParameterVector&)>;

/// Top eigenpair of a symmetric operator by power iteration on H + σI, with σ
/// an estimate of ‖H‖ from 10 plain power steps. Throws NoConvergence.
EigenPair top_eigpair(const LinearOperator& op, std::size_t dim, const EigSolverConfig& cfg,
                      const ParameterVector* warm_start = nullptr);

/// Top eigenvalue of P H P on the complement of the unit vector u.
EigenPair second_eigpair(const LinearOperator& op, const ParameterVector& u,
                         const EigSolverConfig& cfg, const ParameterVector* warm_start = nullptr);

/// Top eigenpair of ∇²L(θ). With cfg.deflation the second eigenvalue is also
/// computed and DegenerateSpectrum thrown when the gap is below
/// 1e-8·max(1, |λ₁|).
EigenPair top_eigpair(const LossOracle& oracle, const ParameterVector& theta,
                      const EigSolverConfig& cfg, const ParameterVector* warm_start = nullptr);

double second_eigenvalue(const LossOracle& oracle, const ParameterVector& theta,
                         const EigSolverConfig& cfg, const EigenPair& known);

/// Extreme Ritz values (min, max) after `steps` Lanczos steps with full
/// reorthogonalization. Exact when steps ≥ dim.
std::pair<double, double> lanczos_extremes(const LinearOperator& op, std::size_t dim, int steps,
                                           std::uint64_t seed);

/// Smallest eigenvalue of ∇²L(θ). Power iteration on −∇²L; when that stalls
/// (clustered bottom spectrum) the Lanczos estimate is returned instead.
double min_eigenvalue(const LossOracle& oracle, const ParameterVector& theta,
                      const EigSolverConfig& cfg);

/// u_new, flipped if it points against u_prev.
ParameterVector fix_sign(const ParameterVector& u_new, const ParameterVector* u_prev);

/// Sharpness, sign-continuous top eigenvector (warm-started from prev->u),
/// λ₂ (NaN unless cfg.deflation) and ∇S. Without prev the sign is chosen so ∇S·u ≥ 0, or, when that
/// product vanishes, so the largest-magnitude entry of u is positive.
SpectralInfo spectral_info(const LossOracle& oracle, const ParameterVector& theta,
                           const EigSolverConfig& cfg, const SpectralInfo* prev = nullptr);

/// Relative gap threshold below which the top eigenvalue counts as repeated.
inline constexpr double kDegenerateGap = 1e-8;

}  // namespace eos
