#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eos/dataset.hpp"
#include "eos/oracle.hpp"

namespace eos {

enum class Activation { swish, tanh };
enum class MlpLossKind { mse, logistic };

/// Fully connected network with a single linear output, trained full-batch.
///
/// Parameters are packed layer by layer as W (out x in, row-major) followed
/// by b (out). Gradient and Hessian-vector products are analytic (backprop and
/// its forward-mode R-operator); third-order contractions use the finite
/// difference fallback.
///
/// Loss: mse = (1/2n) Σ (f(x_i) - y_i)², logistic = (1/n) Σ [softplus(f) - y f]
/// with labels y ∈ {0, 1}.
class MlpLoss final : public LossOracle {
 public:
  MlpLoss(std::vector<std::size_t> widths, Activation activation, MlpLossKind loss,
          Dataset data);

  std::string name() const override { return "mlp"; }

  const std::vector<std::size_t>& widths() const noexcept { return widths_; }
  const Dataset& data() const noexcept { return data_; }

  /// Fan-in scaled Gaussian weights (std 1/sqrt(fan_in)), zero biases.
  ParameterVector initial_parameters(std::uint64_t seed) const;

  /// Network outputs for every sample.
  std::vector<double> predict(const ParameterVector& theta) const;

  static std::size_t parameter_count(const std::vector<std::size_t>& widths);

 protected:
  double value_impl(const ParameterVector& theta) const override;
  ParameterVector gradient_impl(const ParameterVector& theta) const override;
  ParameterVector hvp_impl(const ParameterVector& theta, const ParameterVector& v) const override;

 private:
  struct Layer {
    std::size_t in, out, w_offset, b_offset;
  };
  struct Forward;

  Forward forward(const ParameterVector& theta) const;

  std::vector<std::size_t> widths_;
  std::vector<Layer> layers_;
  Activation activation_;
  MlpLossKind loss_;
  Dataset data_;
};

}  // namespace eos
