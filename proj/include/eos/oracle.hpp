#pragma once

#include <cstddef>
#include <memory>
#include <string>

#include "eos/vector.hpp"

namespace eos {

struct Capabilities {
  bool analytic_grad = false;
  bool analytic_hvp = false;
  bool analytic_third = false;
  bool batched = false;
};

/// Central-difference step sizes, scaled by (1 + ‖θ‖∞).
struct FiniteDifferenceSteps {
  static constexpr double grad = 1e-5;
  static constexpr double hvp = 1e-4;
  static constexpr double third = 1e-3;
};

/// Loss function contract up to third-order directional derivatives.
///
/// Implementations are immutable after construction; every evaluation is a
/// pure function of θ and may run concurrently. The public entry points check
/// dimensions and finiteness and route missing analytic derivatives to the
/// central-difference fallbacks below.
class LossOracle {
 public:
  virtual ~LossOracle() = default;

  std::size_t dim() const noexcept { return dim_; }
  const Capabilities& capabilities() const noexcept { return caps_; }
  virtual std::string name() const = 0;

  double value(const ParameterVector& theta) const;
  ParameterVector gradient(const ParameterVector& theta) const;
  ParameterVector hvp(const ParameterVector& theta, const ParameterVector& v) const;
  /// ∇³L(θ)(v, w) as a vector.
  ParameterVector third_contract(const ParameterVector& theta, const ParameterVector& v,
                                 const ParameterVector& w) const;

 protected:
  LossOracle(std::size_t dim, Capabilities caps);

  virtual double value_impl(const ParameterVector& theta) const = 0;
  virtual ParameterVector gradient_impl(const ParameterVector& theta) const;
  virtual ParameterVector hvp_impl(const ParameterVector& theta, const ParameterVector& v) const;
  virtual ParameterVector third_impl(const ParameterVector& theta, const ParameterVector& v,
                                     const ParameterVector& w) const;

 private:
  void check_arg(const ParameterVector& x, const char* what) const;

  std::size_t dim_;
  Capabilities caps_;
};

using OraclePtr = std::shared_ptr<const LossOracle>;

// Central-difference fallbacks. Each only calls the next-lower public entry
// point, so they double as test oracles for analytic implementations.
ParameterVector fd_gradient(const LossOracle& oracle, const ParameterVector& theta);
ParameterVector fd_hvp(const LossOracle& oracle, const ParameterVector& theta,
                       const ParameterVector& v);
ParameterVector fd_third_contract(const LossOracle& oracle, const ParameterVector& theta,
                                  const ParameterVector& v, const ParameterVector& w);

inline double eval_loss(const LossOracle& o, const ParameterVector& theta) { return o.value(theta); }
inline ParameterVector eval_gradient(const LossOracle& o, const ParameterVector& theta) {
  return o.gradient(theta);
}
inline ParameterVector hvp(const LossOracle& o, const ParameterVector& theta,
                           const ParameterVector& v) {
  return o.hvp(theta, v);
}
inline ParameterVector third_contract(const LossOracle& o, const ParameterVector& theta,
                                      const ParameterVector& v, const ParameterVector& w) {
  return o.third_contract(theta, v, w);
}

}  // namespace eos
