#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "eos/mlp.hpp"
#include "eos/oracle.hpp"

namespace eos {

/// L(x, y, z) = (2/η + √β y) x²/2 − (α/√β) y + z + q x⁴/24 with q = 0 for the
/// plain toy model. Along the constrained trajectory x = y = 0 and z falls by
/// η per step.
struct ToyModelParams {
  double eta = 0.01;
  double alpha = 1.0;
  double beta = 1.0;
};

class ToyLoss final : public LossOracle {
 public:
  /// quartic: signed coefficient q of the x⁴/24 term (negative = subquadratic).
  explicit ToyLoss(ToyModelParams params, double quartic = 0.0);

  std::string name() const override { return quartic_ == 0.0 ? "toy" : "quartic_toy"; }
  const ToyModelParams& params() const noexcept { return params_; }
  double quartic() const noexcept { return quartic_; }
  /// √(2α/β)
  double delta() const noexcept;

 protected:
  double value_impl(const ParameterVector& theta) const override;
  ParameterVector gradient_impl(const ParameterVector& theta) const override;
  ParameterVector hvp_impl(const ParameterVector& theta, const ParameterVector& v) const override;
  ParameterVector third_impl(const ParameterVector& theta, const ParameterVector& v,
                             const ParameterVector& w) const override;

 private:
  ToyModelParams params_;
  double quartic_;
  double sqrt_beta_;
};

/// L(θ) = ½ θᵀ A θ for a symmetric matrix A (row-major).
class QuadraticLoss final : public LossOracle {
 public:
  QuadraticLoss(std::size_t dim, std::vector<double> matrix);
  static QuadraticLoss diagonal(const std::vector<double>& spectrum);

  std::string name() const override { return "quadratic"; }
  const std::vector<double>& matrix() const noexcept { return a_; }

 protected:
  double value_impl(const ParameterVector& theta) const override;
  ParameterVector gradient_impl(const ParameterVector& theta) const override;
  ParameterVector hvp_impl(const ParameterVector& theta, const ParameterVector& v) const override;
  ParameterVector third_impl(const ParameterVector& theta, const ParameterVector& v,
                             const ParameterVector& w) const override;

 private:
  ParameterVector apply(const ParameterVector& v) const;
  std::vector<double> a_;
};

enum class LossFamily { toy, quadratic, quartic_toy, mlp };

struct DatasetSpec {
  enum class Source { synthetic, csv };
  Source source = Source::synthetic;
  std::size_t n = 100;
  double input_std = 1.0;
  std::uint64_t seed = 0;
  std::filesystem::path csv_path;
};

struct MlpSpec {
  std::vector<std::size_t> widths{2, 16, 1};
  Activation activation = Activation::swish;
  MlpLossKind loss = MlpLossKind::mse;
  DatasetSpec data;
};

/// Structured description of a built-in loss.
struct LossSpec {
  LossFamily family = LossFamily::toy;
  ToyModelParams toy;
  double rho4 = 0.0;            // quartic_toy coefficient, >= 0
  bool superquadratic = false;  // quartic_toy sign: + rho4 x⁴/24 when true
  std::vector<double> spectrum;  // quadratic: diagonal
  std::vector<double> matrix;    // quadratic: full row-major matrix (overrides spectrum)
  MlpSpec mlp;
};

/// Builds the oracle for a spec; throws ConfigError on invalid input.
OraclePtr make_builtin_loss(const LossSpec& spec);

std::string to_string(LossFamily family);
LossFamily parse_loss_family(const std::string& name);

}  // namespace eos
