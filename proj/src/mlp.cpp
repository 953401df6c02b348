#include "eos/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "eos/error.hpp"
#include "eos/kernels.hpp"

namespace eos {

namespace {

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

// φ, φ', φ'' evaluated together.
struct ActDerivs {
  double f, d1, d2;
};

inline ActDerivs activate(Activation act, double z) {
  if (act == Activation::tanh) {
    const double t = std::tanh(z);
    const double s = 1.0 - t * t;
    return {t, s, -2.0 * t * s};
  }
  const double s = sigmoid(z);
  const double ds = s * (1.0 - s);
  return {z * s, s + z * ds, ds * (2.0 + z * (1.0 - 2.0 * s))};
}

using Rows = std::vector<double>;  // (units x n), row-major

inline std::span<double> row(Rows& m, std::size_t r, std::size_t n) { return {m.data() + r * n, n}; }
inline std::span<const double> row(const Rows& m, std::size_t r, std::size_t n) {
  return {m.data() + r * n, n};
}

}  // namespace

struct MlpLoss::Forward {
  std::vector<Rows> z;    // pre-activations per layer
  std::vector<Rows> a;    // activations per layer (output layer: a == z)
  std::vector<Rows> da;   // φ'(z) for hidden layers
  std::vector<Rows> dda;  // φ''(z) for hidden layers
};

std::size_t MlpLoss::parameter_count(const std::vector<std::size_t>& widths) {
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) count += widths[l] * widths[l + 1] + widths[l + 1];
  return count;
}

MlpLoss::MlpLoss(std::vector<std::size_t> widths, Activation activation, MlpLossKind loss,
                 Dataset data)
    : LossOracle(parameter_count(widths), Capabilities{true, true, false, true}),
      widths_(std::move(widths)),
      activation_(activation),
      loss_(loss),
      data_(std::move(data)) {
  if (widths_.size() < 2) throw ConfigError("mlp: needs at least two layer widths");
  if (widths_.back() != 1) throw ConfigError("mlp: output width must be 1");
  if (widths_.front() != data_.k) {
    throw ConfigError("mlp: input width " + std::to_string(widths_.front()) +
                      " does not match dataset feature count " + std::to_string(data_.k));
  }
  if (loss_ == MlpLossKind::logistic) {
    for (double y : data_.targets) {
      if (y != 0.0 && y != 1.0) throw ConfigError("mlp: logistic loss needs labels in {0, 1}");
    }
  }
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    Layer layer{widths_[l], widths_[l + 1], offset, offset + widths_[l] * widths_[l + 1]};
    offset = layer.b_offset + layer.out;
    layers_.push_back(layer);
  }
}

ParameterVector MlpLoss::initial_parameters(std::uint64_t seed) const {
  ParameterVector theta(dim());
  std::mt19937_64 rng(seed);
  for (const auto& layer : layers_) {
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(layer.in)));
    for (std::size_t k = 0; k < layer.in * layer.out; ++k) theta[layer.w_offset + k] = normal(rng);
  }
  return theta;
}

MlpLoss::Forward MlpLoss::forward(const ParameterVector& theta) const {
  const std::size_t n = data_.n;
  const std::size_t depth = layers_.size();
  Forward f;
  f.z.resize(depth);
  f.a.resize(depth);
  f.da.resize(depth);
  f.dda.resize(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    const Layer& L = layers_[l];
    const Rows& input = l == 0 ? data_.features : f.a[l - 1];
    Rows& z = f.z[l];
    z.assign(L.out * n, 0.0);
    for (std::size_t o = 0; o < L.out; ++o) {
      auto zo = row(z, o, n);
      const double bias = theta[L.b_offset + o];
      for (double& v : zo) v = bias;
      for (std::size_t i = 0; i < L.in; ++i) {
        kernels::axpy(theta[L.w_offset + o * L.in + i], row(input, i, n), zo);
      }
    }
    if (l + 1 == depth) {
      f.a[l] = z;
      continue;
    }
    f.a[l].resize(z.size());
    f.da[l].resize(z.size());
    f.dda[l].resize(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) {
      const ActDerivs d = activate(activation_, z[k]);
      f.a[l][k] = d.f;
      f.da[l][k] = d.d1;
      f.dda[l][k] = d.d2;
    }
  }
  return f;
}

std::vector<double> MlpLoss::predict(const ParameterVector& theta) const {
  return forward(theta).a.back();
}

double MlpLoss::value_impl(const ParameterVector& theta) const {
  const auto out = predict(theta);
  const auto n = static_cast<double>(data_.n);
  double acc = 0.0;
  if (loss_ == MlpLossKind::mse) {
    for (std::size_t i = 0; i < data_.n; ++i) {
      const double r = out[i] - data_.targets[i];
      acc += r * r;
    }
    return acc / (2.0 * n);
  }
  for (std::size_t i = 0; i < data_.n; ++i) acc += softplus(out[i]) - data_.targets[i] * out[i];
  return acc / n;
}

ParameterVector MlpLoss::gradient_impl(const ParameterVector& theta) const {
  const std::size_t n = data_.n;
  const auto inv_n = 1.0 / static_cast<double>(n);
  const Forward f = forward(theta);

  Rows g(n);
  const Rows& out = f.a.back();
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = loss_ == MlpLossKind::mse ? (out[i] - data_.targets[i]) * inv_n
                                     : (sigmoid(out[i]) - data_.targets[i]) * inv_n;
  }

  ParameterVector grad(dim());
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const Layer& L = layers_[l];
    const Rows& input = l == 0 ? data_.features : f.a[l - 1];
    for (std::size_t o = 0; o < L.out; ++o) {
      const auto go = row(g, o, n);
      for (std::size_t i = 0; i < L.in; ++i) {
        grad[L.w_offset + o * L.in + i] = kernels::dot(go, row(input, i, n));
      }
      grad[L.b_offset + o] = kernels::sum(go);
    }
    if (l == 0) break;
    Rows d(L.in * n, 0.0);
    for (std::size_t o = 0; o < L.out; ++o) {
      for (std::size_t i = 0; i < L.in; ++i) {
        kernels::axpy(theta[L.w_offset + o * L.in + i], row(g, o, n), row(d, i, n));
      }
    }
    kernels::hadamard(d, f.da[l - 1], d);
    g = std::move(d);
  }
  return grad;
}

ParameterVector MlpLoss::hvp_impl(const ParameterVector& theta, const ParameterVector& v) const {
  const std::size_t n = data_.n;
  const std::size_t depth = layers_.size();
  const auto inv_n = 1.0 / static_cast<double>(n);
  const Forward f = forward(theta);

  // Forward R-pass: directional derivatives of pre-activations and activations.
  std::vector<Rows> rz(depth), ra(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    const Layer& L = layers_[l];
    const Rows& input = l == 0 ? data_.features : f.a[l - 1];
    Rows& r = rz[l];
    r.assign(L.out * n, 0.0);
    for (std::size_t o = 0; o < L.out; ++o) {
      auto ro = row(r, o, n);
      const double vb = v[L.b_offset + o];
      for (double& x : ro) x = vb;
      for (std::size_t i = 0; i < L.in; ++i) {
        kernels::axpy(v[L.w_offset + o * L.in + i], row(input, i, n), ro);
        if (l > 0) kernels::axpy(theta[L.w_offset + o * L.in + i], row(ra[l - 1], i, n), ro);
      }
    }
    if (l + 1 == depth) {
      ra[l] = r;
    } else {
      ra[l].resize(r.size());
      kernels::hadamard(f.da[l], r, ra[l]);
    }
  }

  // Output layer seeds.
  Rows g(n), rg(n);
  const Rows& out = f.a.back();
  for (std::size_t i = 0; i < n; ++i) {
    if (loss_ == MlpLossKind::mse) {
      g[i] = (out[i] - data_.targets[i]) * inv_n;
      rg[i] = rz.back()[i] * inv_n;
    } else {
      const double s = sigmoid(out[i]);
      g[i] = (s - data_.targets[i]) * inv_n;
      rg[i] = s * (1.0 - s) * rz.back()[i] * inv_n;
    }
  }

  ParameterVector hv(dim());
  for (std::size_t l = depth; l-- > 0;) {
    const Layer& L = layers_[l];
    const Rows& input = l == 0 ? data_.features : f.a[l - 1];
    for (std::size_t o = 0; o < L.out; ++o) {
      const auto go = row(g, o, n);
      const auto rgo = row(rg, o, n);
      for (std::size_t i = 0; i < L.in; ++i) {
        double acc = kernels::dot(rgo, row(input, i, n));
        if (l > 0) acc += kernels::dot(go, row(ra[l - 1], i, n));
        hv[L.w_offset + o * L.in + i] = acc;
      }
      hv[L.b_offset + o] = kernels::sum(rgo);
    }
    if (l == 0) break;

    // d = Wᵀ g, rd = Vᵀ g + Wᵀ rg
    Rows d(L.in * n, 0.0), rd(L.in * n, 0.0);
    for (std::size_t o = 0; o < L.out; ++o) {
      for (std::size_t i = 0; i < L.in; ++i) {
        const double w = theta[L.w_offset + o * L.in + i];
        const double vw = v[L.w_offset + o * L.in + i];
        kernels::axpy(w, row(g, o, n), row(d, i, n));
        kernels::axpy(vw, row(g, o, n), row(rd, i, n));
        kernels::axpy(w, row(rg, o, n), row(rd, i, n));
      }
    }
    const Rows& dphi = f.da[l - 1];
    const Rows& ddphi = f.dda[l - 1];
    const Rows& rzp = rz[l - 1];
    Rows gp(d.size()), rgp(d.size());
    for (std::size_t k = 0; k < d.size(); ++k) {
      gp[k] = dphi[k] * d[k];
      rgp[k] = ddphi[k] * rzp[k] * d[k] + dphi[k] * rd[k];
    }
    g = std::move(gp);
    rg = std::move(rgp);
  }
  return hv;
}

}  // namespace eos
