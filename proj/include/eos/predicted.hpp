#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "eos/oracle.hpp"
#include "eos/spectral.hpp"
#include "eos/vector.hpp"

namespace eos {

struct TaylorQuantities {
  double loss = 0.0;
  ParameterVector grad;
  ParameterVector u;
  double sharpness = 0.0;
  ParameterVector grad_S;
  ParameterVector grad_S_perp;
  double alpha = 0.0;  // −∇L·∇S
  double beta = 0.0;   // ‖∇S⊥‖²
  double delta = 0.0;  // √(2α/β), 0 when α ≤ 0 or β = 0
  double eps = 0.0;    // η√max(α, 0)
};

TaylorQuantities taylor_at(const LossOracle& oracle, const ParameterVector& theta_dagger,
                           const SpectralInfo& spectral, double eta);

struct PredictedState {
  ParameterVector v_star;
  double x_star = 0.0;
  double y_star = 0.0;
  std::vector<std::pair<double, double>> source_history;  // (δ_s, x*_s)
};

/// v*₀ = v₀ with x*, y* read off against tq₀.
PredictedState initial_predicted_state(const ParameterVector& v0, const TaylorQuantities& tq0);

using HessianApply = std::function<ParameterVector(const ParameterVector&)>;

/// One step of the predicted recursion. x*, y* of the result are projections
/// of the new v* onto u_{t+1} and ∇S⊥_{t+1}. Throws NonFinite when v* overflows.
PredictedState predicted_step(const TaylorQuantities& tq_t, const TaylorQuantities& tq_next,
                              const PredictedState& state, double eta,
                              const HessianApply& hessian_t);

/// Loss profile along u: F(x) = L(θ† + xu) − L(θ†) − x²/η on a symmetric grid.
class Profile1D {
 public:
  Profile1D() = default;
  Profile1D(std::vector<double> xs, std::vector<double> values);

  const std::vector<double>& xs() const noexcept { return xs_; }
  const std::vector<double>& values() const noexcept { return fs_; }
  double halfwidth() const noexcept { return xs_.empty() ? 0.0 : xs_.back(); }
  bool identically_zero() const noexcept;

  // Local quartic least-squares fit over the 7 nearest samples.
  double value(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;

  /// (F(x) + F(−x))/2 on the same grid.
  Profile1D even_part() const;

 private:
  struct Fit {
    double f, df, d2f;
  };
  Fit fit(double x) const;
  std::vector<double> xs_;
  std::vector<double> fs_;
};

Profile1D profile_1d(const LossOracle& oracle, const ParameterVector& theta_dagger,
                     const ParameterVector& u, double eta, double halfwidth,
                     std::size_t n_samples = 41);

/// predicted_step with the u-direction update −(1 + ηy*)x* − ηF′(x*).
/// Throws ProfileRangeExceeded when |x*| lies outside the profile grid.
PredictedState generalized_predicted_step(const TaylorQuantities& tq_t,
                                          const TaylorQuantities& tq_next,
                                          const PredictedState& state, double eta,
                                          const HessianApply& hessian_t, const Profile1D& profile);

/// y*_{t+1} from the unfolded source sum, with β_{s→t} evaluated by pulling
/// ∇S⊥_{t+1} back through (I − ηH_k)P⊥ factors. tq must hold entries 0..t+1,
/// x_star entries 0..t; hessian_at(s, v) applies ∇²L(θ†_s).
double xy_closed_form(const std::vector<TaylorQuantities>& tq, const std::vector<double>& x_star,
                      const ParameterVector& v0, double eta, std::size_t t,
                      const std::function<ParameterVector(std::size_t, const ParameterVector&)>& hessian_at);

/// 2/η + y* + (∇S·u)x*, plus F″(x*) when a profile is given.
double predicted_sharpness(const TaylorQuantities& tq, const PredictedState& state, double eta,
                           const Profile1D* profile = nullptr);

/// L† + x*²/η
double predicted_loss(double loss_dagger, const PredictedState& state, double eta);

}  // namespace eos
