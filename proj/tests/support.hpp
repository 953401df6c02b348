#pragma once

// Shared oracles for the test binaries: dense Hessians assembled from hvp
// columns, dense eigensolves, finite-difference sharpness gradients.

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <random>

#include "eos/dataset.hpp"
#include "eos/losses.hpp"
#include "eos/mlp.hpp"
#include "eos/spectral.hpp"
#include "eos/vector.hpp"

namespace eos::test {

inline ParameterVector random_vector(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  ParameterVector v(n);
  for (double& x : v) x = nd(rng);
  return v;
}

inline ParameterVector random_unit(std::size_t n, std::mt19937_64& rng) {
  return normalized(random_vector(n, rng));
}

inline double rel_err(const ParameterVector& a, const ParameterVector& b) {
  return norm(a - b) / std::max(1.0, norm(b));
}

inline std::shared_ptr<MlpLoss> small_mlp(Activation act = Activation::tanh,
                                          MlpLossKind loss = MlpLossKind::mse,
                                          std::uint64_t seed = 11, std::size_t n = 100) {
  SyntheticSpec spec;
  spec.n = n;
  spec.input_std = 0.5;
  spec.seed = seed;
  spec.binary_labels = loss == MlpLossKind::logistic;
  return std::make_shared<MlpLoss>(std::vector<std::size_t>{2, 16, 1}, act, loss, make_synthetic(spec));
}

inline Eigen::MatrixXd dense_hessian(const LossOracle& o, const ParameterVector& theta) {
  const std::size_t d = o.dim();
  Eigen::MatrixXd h(d, d);
  for (std::size_t j = 0; j < d; ++j) {
    const ParameterVector col = o.hvp(theta, ParameterVector::basis(d, j));
    for (std::size_t i = 0; i < d; ++i) h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
  }
  return 0.5 * (h + h.transpose());
}

inline ParameterVector to_pv(const Eigen::VectorXd& v) {
  return ParameterVector(std::vector<double>(v.data(), v.data() + v.size()));
}

/// Central difference of the top eigenvalue along each coordinate.
inline ParameterVector fd_grad_sharpness(const LossOracle& o, const ParameterVector& theta,
                                         const ParameterVector& u, double h_base = 1e-4) {
  EigSolverConfig cfg;
  cfg.deflation = false;
  cfg.tol = 1e-12;
  cfg.max_iters = 100000;
  const double h = h_base * (1.0 + norm_inf(theta));
  ParameterVector g(o.dim());
  for (std::size_t i = 0; i < o.dim(); ++i) {
    ParameterVector p = theta, m = theta;
    p[i] += h;
    m[i] -= h;
    g[i] = (top_eigpair(o, p, cfg, &u).value - top_eigpair(o, m, cfg, &u).value) / (2 * h);
  }
  return g;
}

/// Symmetric matrix Q diag(spec) Qᵀ with Haar-random Q, row-major.
inline std::vector<double> random_symmetric(const std::vector<double>& spectrum, std::mt19937_64& rng) {
  const auto n = static_cast<Eigen::Index>(spectrum.size());
  std::normal_distribution<double> nd;
  Eigen::MatrixXd g = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return nd(rng); });
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
  const Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(spectrum.data(), n);
  const Eigen::MatrixXd a = q * d.asDiagonal() * q.transpose();
  std::vector<double> flat(static_cast<std::size_t>(n * n));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) flat[static_cast<std::size_t>(i * n + j)] = 0.5 * (a(i, j) + a(j, i));
  return flat;
}

}  // namespace eos::test
