#include "eos/losses.hpp"

#include <cmath>
#include <utility>

#include "eos/error.hpp"
#include "eos/kernels.hpp"

namespace eos {

// ---------------------------------------------------------------------------
// Toy model

ToyLoss::ToyLoss(ToyModelParams params, double quartic)
    : LossOracle(3, Capabilities{true, true, true, false}),
      params_(params),
      quartic_(quartic),
      sqrt_beta_(std::sqrt(params.beta)) {
  if (!(params.eta > 0.0)) throw ConfigError("toy model: eta must be positive");
  if (!(params.alpha > 0.0) || !(params.beta > 0.0)) {
    throw ConfigError("toy model: alpha and beta must be positive");
  }
  if (!std::isfinite(quartic)) throw ConfigError("toy model: quartic coefficient not finite");
}

double ToyLoss::delta() const noexcept { return std::sqrt(2.0 * params_.alpha / params_.beta); }

double ToyLoss::value_impl(const ParameterVector& t) const {
  const double x = t[0], y = t[1], z = t[2];
  const double a = 2.0 / params_.eta + sqrt_beta_ * y;
  const double x2 = x * x;
  return a * x2 / 2.0 - params_.alpha / sqrt_beta_ * y + z + quartic_ * x2 * x2 / 24.0;
}

ParameterVector ToyLoss::gradient_impl(const ParameterVector& t) const {
  const double x = t[0], y = t[1];
  const double a = 2.0 / params_.eta + sqrt_beta_ * y;
  return {a * x + quartic_ * x * x * x / 6.0,
          sqrt_beta_ * x * x / 2.0 - params_.alpha / sqrt_beta_, 1.0};
}

ParameterVector ToyLoss::hvp_impl(const ParameterVector& t, const ParameterVector& v) const {
  const double x = t[0], y = t[1];
  const double hxx = 2.0 / params_.eta + sqrt_beta_ * y + quartic_ * x * x / 2.0;
  const double hxy = sqrt_beta_ * x;
  return {hxx * v[0] + hxy * v[1], hxy * v[0], 0.0};
}

ParameterVector ToyLoss::third_impl(const ParameterVector& t, const ParameterVector& v,
                                    const ParameterVector& w) const {
  // Nonzero entries: T_xxx = q x, T_xxy = T_xyx = T_yxx = √β.
  const double x = t[0];
  return {quartic_ * x * v[0] * w[0] + sqrt_beta_ * (v[0] * w[1] + v[1] * w[0]),
          sqrt_beta_ * v[0] * w[0], 0.0};
}

// ---------------------------------------------------------------------------
// Quadratic

QuadraticLoss::QuadraticLoss(std::size_t dim, std::vector<double> matrix)
    : LossOracle(dim, Capabilities{true, true, true, false}), a_(std::move(matrix)) {
  if (a_.size() != dim * dim) throw ConfigError("quadratic: matrix must be d x d");
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double aij = a_[i * dim + j], aji = a_[j * dim + i];
      if (!std::isfinite(aij) || std::abs(aij - aji) > 1e-12 * (1.0 + std::abs(aij))) {
        throw ConfigError("quadratic: matrix must be finite and symmetric");
      }
    }
  }
}

QuadraticLoss QuadraticLoss::diagonal(const std::vector<double>& spectrum) {
  const std::size_t d = spectrum.size();
  std::vector<double> a(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) a[i * d + i] = spectrum[i];
  return QuadraticLoss(d, std::move(a));
}

ParameterVector QuadraticLoss::apply(const ParameterVector& v) const {
  const std::size_t d = dim();
  ParameterVector out(d);
  for (std::size_t i = 0; i < d; ++i) {
    out[i] = kernels::dot({a_.data() + i * d, d}, v.span());
  }
  return out;
}

double QuadraticLoss::value_impl(const ParameterVector& t) const { return 0.5 * dot(t, apply(t)); }

ParameterVector QuadraticLoss::gradient_impl(const ParameterVector& t) const { return apply(t); }

ParameterVector QuadraticLoss::hvp_impl(const ParameterVector&, const ParameterVector& v) const {
  return apply(v);
}

ParameterVector QuadraticLoss::third_impl(const ParameterVector& t, const ParameterVector&,
                                          const ParameterVector&) const {
  return ParameterVector(t.size());
}

// ---------------------------------------------------------------------------
// Factory

std::string to_string(LossFamily family) {
  switch (family) {
    case LossFamily::toy: return "toy";
    case LossFamily::quadratic: return "quadratic";
    case LossFamily::quartic_toy: return "quartic_toy";
    case LossFamily::mlp: return "mlp";
  }
  return "unknown";
}

LossFamily parse_loss_family(const std::string& name) {
  if (name == "toy") return LossFamily::toy;
  if (name == "quadratic") return LossFamily::quadratic;
  if (name == "quartic_toy") return LossFamily::quartic_toy;
  if (name == "mlp") return LossFamily::mlp;
  throw ConfigError("unknown loss family '" + name + "'");
}

OraclePtr make_builtin_loss(const LossSpec& spec) {
  switch (spec.family) {
    case LossFamily::toy:
      return std::make_shared<ToyLoss>(spec.toy);
    case LossFamily::quartic_toy: {
      if (!(spec.rho4 >= 0.0)) throw ConfigError("quartic_toy: rho4 must be >= 0");
      return std::make_shared<ToyLoss>(spec.toy, spec.superquadratic ? spec.rho4 : -spec.rho4);
    }
    case LossFamily::quadratic: {
      if (!spec.matrix.empty()) {
        const auto d = static_cast<std::size_t>(std::llround(std::sqrt(spec.matrix.size())));
        if (d == 0 || d * d != spec.matrix.size()) {
          throw ConfigError("quadratic: matrix entry count is not a square");
        }
        return std::make_shared<QuadraticLoss>(d, spec.matrix);
      }
      if (spec.spectrum.empty()) throw ConfigError("quadratic: needs a spectrum or matrix");
      return std::make_shared<QuadraticLoss>(QuadraticLoss::diagonal(spec.spectrum));
    }
    case LossFamily::mlp: {
      const auto& m = spec.mlp;
      if (m.widths.size() < 2) throw ConfigError("mlp: needs at least input and output widths");
      for (auto w : m.widths) {
        if (w == 0) throw ConfigError("mlp: layer widths must be positive");
      }
      Dataset data;
      if (m.data.source == DatasetSpec::Source::csv) {
        data = load_csv(m.data.csv_path);
      } else {
        data = make_synthetic(SyntheticSpec{m.data.n, m.widths.front(), m.data.input_std,
                                            m.data.seed, m.loss == MlpLossKind::logistic});
      }
      return std::make_shared<MlpLoss>(m.widths, m.activation, m.loss, std::move(data));
    }
  }
  throw ConfigError("unknown loss family");
}

}  // namespace eos
