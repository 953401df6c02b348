#include "eos/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eos/error.hpp"

namespace eos {

LossOracle::LossOracle(std::size_t dim, Capabilities caps) : dim_(dim), caps_(caps) {
  if (dim == 0) throw ConfigError("loss dimension must be positive");
}

void LossOracle::check_arg(const ParameterVector& x, const char* what) const {
  if (x.size() != dim_) {
    throw DomainError(name() + ": " + what + " has length " + std::to_string(x.size()) +
                      ", expected " + std::to_string(dim_));
  }
  if (!x.all_finite()) throw NonFinite(name() + ": non-finite " + what);
}

double LossOracle::value(const ParameterVector& theta) const {
  check_arg(theta, "theta");
  const double v = value_impl(theta);
  if (!std::isfinite(v)) throw NonFinite(name() + ": loss is not finite");
  return v;
}

ParameterVector LossOracle::gradient(const ParameterVector& theta) const {
  check_arg(theta, "theta");
  ParameterVector g = caps_.analytic_grad ? gradient_impl(theta) : fd_gradient(*this, theta);
  if (!g.all_finite()) throw NonFinite(name() + ": gradient is not finite");
  return g;
}

ParameterVector LossOracle::hvp(const ParameterVector& theta, const ParameterVector& v) const {
  check_arg(theta, "theta");
  check_arg(v, "direction");
  ParameterVector hv = caps_.analytic_hvp ? hvp_impl(theta, v) : fd_hvp(*this, theta, v);
  if (!hv.all_finite()) throw NonFinite(name() + ": Hessian-vector product is not finite");
  return hv;
}

ParameterVector LossOracle::third_contract(const ParameterVector& theta, const ParameterVector& v,
                                           const ParameterVector& w) const {
  check_arg(theta, "theta");
  check_arg(v, "direction");
  check_arg(w, "direction");
  ParameterVector t =
      caps_.analytic_third ? third_impl(theta, v, w) : fd_third_contract(*this, theta, v, w);
  if (!t.all_finite()) throw NonFinite(name() + ": third-derivative contraction is not finite");
  return t;
}

ParameterVector LossOracle::gradient_impl(const ParameterVector& theta) const {
  return fd_gradient(*this, theta);
}

ParameterVector LossOracle::hvp_impl(const ParameterVector& theta, const ParameterVector& v) const {
  return fd_hvp(*this, theta, v);
}

ParameterVector LossOracle::third_impl(const ParameterVector& theta, const ParameterVector& v,
                                       const ParameterVector& w) const {
  return fd_third_contract(*this, theta, v, w);
}

ParameterVector fd_gradient(const LossOracle& oracle, const ParameterVector& theta) {
  const double h = FiniteDifferenceSteps::grad * (1.0 + norm_inf(theta));
  ParameterVector g(theta.size());
  ParameterVector probe = theta;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    probe[i] = theta[i] + h;
    const double up = oracle.value(probe);
    probe[i] = theta[i] - h;
    const double down = oracle.value(probe);
    probe[i] = theta[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

namespace {

// Shared by the hvp and third-order fallbacks: central difference of f along
// direction d with base step `base`, where the step is divided by max(1, ‖d‖)
// so the actual displacement has length at most `base`.
template <class F>
ParameterVector central_difference(const ParameterVector& theta, const ParameterVector& d,
                                   double base, F&& f) {
  const double dn = norm(d);
  if (dn == 0.0) return ParameterVector(theta.size());
  const double h = base / std::max(1.0, dn);
  ParameterVector plus = theta;
  plus.add_scaled(h, d);
  ParameterVector minus = theta;
  minus.add_scaled(-h, d);
  ParameterVector out = f(plus);
  out -= f(minus);
  out *= 1.0 / (2.0 * h);
  return out;
}

}  // namespace

ParameterVector fd_hvp(const LossOracle& oracle, const ParameterVector& theta,
                       const ParameterVector& v) {
  const double base = FiniteDifferenceSteps::hvp * (1.0 + norm_inf(theta));
  return central_difference(theta, v, base,
                            [&](const ParameterVector& p) { return oracle.gradient(p); });
}

ParameterVector fd_third_contract(const LossOracle& oracle, const ParameterVector& theta,
                                  const ParameterVector& v, const ParameterVector& w) {
  const double base = FiniteDifferenceSteps::third * (1.0 + norm_inf(theta));
  return central_difference(theta, w, base,
                            [&](const ParameterVector& p) { return oracle.hvp(p, v); });
}

}  // namespace eos
