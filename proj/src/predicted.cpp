#include "eos/predicted.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "eos/error.hpp"

namespace eos {

TaylorQuantities taylor_at(const LossOracle& oracle, const ParameterVector& theta_dagger,
                           const SpectralInfo& spectral, double eta) {
  TaylorQuantities tq;
  tq.loss = oracle.value(theta_dagger);
  tq.grad = oracle.gradient(theta_dagger);
  tq.u = spectral.u;
  tq.sharpness = spectral.sharpness;
  tq.grad_S = spectral.grad_sharpness;
  tq.grad_S_perp = project_out(tq.grad_S, tq.u);
  tq.alpha = -dot(tq.grad, tq.grad_S);
  tq.beta = dot(tq.grad_S_perp, tq.grad_S_perp);
  tq.delta = (tq.alpha > 0.0 && tq.beta > 0.0) ? std::sqrt(2.0 * tq.alpha / tq.beta) : 0.0;
  tq.eps = eta * std::sqrt(std::max(tq.alpha, 0.0));
  return tq;
}

PredictedState initial_predicted_state(const ParameterVector& v0, const TaylorQuantities& tq0) {
  PredictedState s;
  s.v_star = v0;
  s.x_star = dot(tq0.u, v0);
  s.y_star = dot(tq0.grad_S_perp, v0);
  return s;
}

namespace {

PredictedState step_with_x(const TaylorQuantities& tq_t, const TaylorQuantities& tq_next,
                           const PredictedState& state, double eta, const HessianApply& hessian_t,
                           double x_next) {
  const double x = state.x_star;
  ParameterVector w = project_out(state.v_star, tq_t.u);
  w.add_scaled(-eta, hessian_t(w));
  w.add_scaled(eta * (tq_t.delta * tq_t.delta - x * x) / 2.0, tq_t.grad_S_perp);
  w = project_out(std::move(w), tq_next.u);
  w.add_scaled(x_next, tq_next.u);
  if (!w.all_finite()) throw NonFinite("predicted dynamics: v* is no longer finite");

  PredictedState next;
  next.x_star = dot(tq_next.u, w);
  next.y_star = dot(tq_next.grad_S_perp, w);
  next.v_star = std::move(w);
  next.source_history = state.source_history;
  next.source_history.emplace_back(tq_t.delta, x);
  return next;
}

}  // namespace

PredictedState predicted_step(const TaylorQuantities& tq_t, const TaylorQuantities& tq_next,
                              const PredictedState& state, double eta,
                              const HessianApply& hessian_t) {
  const double x_next = -(1.0 + eta * state.y_star) * state.x_star;
  return step_with_x(tq_t, tq_next, state, eta, hessian_t, x_next);
}

PredictedState generalized_predicted_step(const TaylorQuantities& tq_t,
                                          const TaylorQuantities& tq_next,
                                          const PredictedState& state, double eta,
                                          const HessianApply& hessian_t, const Profile1D& profile) {
  if (std::abs(state.x_star) > profile.halfwidth()) {
    throw ProfileRangeExceeded("|x*| = " + std::to_string(std::abs(state.x_star)) +
                               " outside profile halfwidth " + std::to_string(profile.halfwidth()));
  }
  double x_next = -(1.0 + eta * state.y_star) * state.x_star;
  if (!profile.identically_zero()) x_next -= eta * profile.derivative(state.x_star);
  return step_with_x(tq_t, tq_next, state, eta, hessian_t, x_next);
}

double xy_closed_form(const std::vector<TaylorQuantities>& tq, const std::vector<double>& x_star,
                      const ParameterVector& v0, double eta, std::size_t t,
                      const std::function<ParameterVector(std::size_t, const ParameterVector&)>& hessian_at) {
  if (tq.size() < t + 2 || x_star.size() < t + 1) {
    throw DomainError("xy_closed_form: history shorter than requested step");
  }
  ParameterVector r = tq[t + 1].grad_S_perp;
  double y = 0.0;
  for (std::size_t s = t + 1; s-- > 0;) {
    const double beta_st = dot(r, tq[s].grad_S_perp);
    y += eta * beta_st * (tq[s].delta * tq[s].delta - x_star[s] * x_star[s]) / 2.0;
    r.add_scaled(-eta, hessian_at(s, r));
    r = project_out(std::move(r), tq[s].u);
  }
  return y + dot(r, v0);
}

double predicted_sharpness(const TaylorQuantities& tq, const PredictedState& state, double eta,
                           const Profile1D* profile) {
  double s = 2.0 / eta + state.y_star + dot(tq.grad_S, tq.u) * state.x_star;
  if (profile && !profile->identically_zero()) s += profile->second_derivative(state.x_star);
  return s;
}

double predicted_loss(double loss_dagger, const PredictedState& state, double eta) {
  return loss_dagger + state.x_star * state.x_star / eta;
}

// ---- profile -------------------------------------------------------------

Profile1D::Profile1D(std::vector<double> xs, std::vector<double> values)
    : xs_(std::move(xs)), fs_(std::move(values)) {
  if (xs_.size() != fs_.size() || xs_.size() < 7) {
    throw DomainError("Profile1D needs at least 7 matching samples");
  }
}

bool Profile1D::identically_zero() const noexcept {
  return std::all_of(fs_.begin(), fs_.end(), [](double f) { return f == 0.0; });
}

Profile1D::Fit Profile1D::fit(double x) const {
  const std::size_t n = xs_.size();
  const double h = (xs_.back() - xs_.front()) / static_cast<double>(n - 1);
  // window of 7 samples centred on the nearest grid point
  const double pos = (x - xs_.front()) / h;
  long centre = std::lround(pos);
  centre = std::clamp<long>(centre, 3, static_cast<long>(n) - 4);
  Eigen::Matrix<double, 7, 5> a;
  Eigen::Matrix<double, 7, 1> b;
  for (int i = 0; i < 7; ++i) {
    const std::size_t k = static_cast<std::size_t>(centre - 3 + i);
    const double s = (xs_[k] - x) / h;
    double p = 1.0;
    for (int j = 0; j < 5; ++j) {
      a(i, j) = p;
      p *= s;
    }
    b(i) = fs_[k];
  }
  const Eigen::Matrix<double, 5, 1> c = a.colPivHouseholderQr().solve(b);
  return {c(0), c(1) / h, 2.0 * c(2) / (h * h)};
}

double Profile1D::value(double x) const { return fit(x).f; }
double Profile1D::derivative(double x) const { return fit(x).df; }
double Profile1D::second_derivative(double x) const { return fit(x).d2f; }

Profile1D Profile1D::even_part() const {
  std::vector<double> even(fs_.size());
  for (std::size_t i = 0; i < fs_.size(); ++i) {
    even[i] = 0.5 * (fs_[i] + fs_[fs_.size() - 1 - i]);
  }
  return Profile1D(xs_, std::move(even));
}

Profile1D profile_1d(const LossOracle& oracle, const ParameterVector& theta_dagger,
                     const ParameterVector& u, double eta, double halfwidth,
                     std::size_t n_samples) {
  if (!(halfwidth > 0.0)) throw DomainError("profile halfwidth must be positive");
  if (n_samples < 9 || n_samples % 2 == 0) throw DomainError("profile needs an odd sample count >= 9");
  const double l0 = oracle.value(theta_dagger);
  const std::size_t mid = n_samples / 2;
  std::vector<double> xs(n_samples), fs(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double x = halfwidth * (static_cast<double>(i) - static_cast<double>(mid)) /
                     static_cast<double>(mid);
    xs[i] = x;
    if (i == mid) {
      fs[i] = 0.0;
      continue;
    }
    ParameterVector p = theta_dagger;
    p.add_scaled(x, u);
    const double lp = oracle.value(p);
    fs[i] = lp - l0 - x * x / eta;
    if (!std::isfinite(fs[i])) throw NonFinite("loss profile blew up at x = " + std::to_string(x));
    // cancellation noise is not curvature: an exactly quadratic loss must give F ≡ 0
    const double noise = 8.0 * std::numeric_limits<double>::epsilon() *
                         (std::abs(lp) + std::abs(l0) + x * x / eta);
    if (std::abs(fs[i]) <= noise) fs[i] = 0.0;
  }
  xs[mid] = 0.0;
  return Profile1D(std::move(xs), std::move(fs));
}

}  // namespace eos
