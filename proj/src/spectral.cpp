#include "eos/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Dense>
#include <vector>

#include "eos/error.hpp"

namespace eos {

namespace {

ParameterVector random_unit(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  ParameterVector v(dim);
  for (double& x : v) x = normal(rng);
  return normalized(std::move(v));
}

double norm_estimate(const LinearOperator& op, ParameterVector w) {
  double est = 0.0;
  for (int k = 0; k < 10; ++k) {
    ParameterVector hw = op(w);
    est = norm(hw);
    if (est == 0.0) break;
    hw *= 1.0 / est;
    w = std::move(hw);
  }
  return est;
}

// Top Ritz vector of span(vs), using the stored products hvs = H vs.
// Modified Gram-Schmidt (two passes) carries the products along, so the
// projected matrix costs no further operator applications.
ParameterVector ritz_restart(const std::vector<ParameterVector>& vs, const std::vector<ParameterVector>& hvs) {
  std::vector<ParameterVector> q, hq;
  // newest iterate first: when the older ones add nothing it is kept as is
  for (std::size_t j = vs.size(); j-- > 0;) {
    ParameterVector w = vs[j], hw = hvs[j];
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < q.size(); ++i) {
        const double c = dot(q[i], w);
        w.add_scaled(-c, q[i]);
        hw.add_scaled(-c, hq[i]);
      }
    }
    const double n = norm(w);
    if (!(n > 1e-6)) continue;  // too close to the span for an accurate H q
    w *= 1.0 / n;
    hw *= 1.0 / n;
    q.push_back(std::move(w));
    hq.push_back(std::move(hw));
  }
  const auto k = static_cast<Eigen::Index>(q.size());
  Eigen::MatrixXd t(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) t(i, j) = dot(q[static_cast<std::size_t>(i)], hq[static_cast<std::size_t>(j)]);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (t + t.transpose()));
  const Eigen::VectorXd y = es.eigenvectors().col(k - 1);
  ParameterVector v(vs.front().size());
  for (Eigen::Index i = 0; i < k; ++i) v.add_scaled(y(i), q[static_cast<std::size_t>(i)]);
  return v;
}

// Shifted power iteration with optional Rayleigh-Ritz restarts. `orthogonal_to`
// (optional) is projected out of every iterate to stay in its complement.
EigenPair power_iterate(const LinearOperator& op, ParameterVector v, const EigSolverConfig& cfg,
                        const ParameterVector* orthogonal_to) {
  if (cfg.max_iters < 1 || !(cfg.tol > 0.0)) {
    throw ConfigError("eigensolver needs max_iters >= 1 and tol > 0");
  }
  auto restrict_to = [&](ParameterVector& x) {
    if (orthogonal_to) x = project_out(std::move(x), *orthogonal_to);
  };
  restrict_to(v);
  v = normalized(std::move(v));
  if (norm(v) == 0.0) {
    v = random_unit(v.size(), cfg.seed + 1);
    restrict_to(v);
    v = normalized(std::move(v));
  }
  const double sigma = norm_estimate(op, v);
  const auto window = static_cast<std::size_t>(std::max(cfg.ritz_window, 0));
  std::vector<ParameterVector> vs, hvs;

  for (int it = 1; it <= cfg.max_iters; ++it) {
    ParameterVector hv = op(v);
    const double lambda = dot(v, hv);
    ParameterVector r = hv;
    r.add_scaled(-lambda, v);
    const double res = norm(r);
    if (!std::isfinite(res)) throw NonFinite("eigensolver: non-finite residual");
    if (res <= cfg.tol * std::max(1.0, std::abs(lambda))) return {lambda, std::move(v), it};
    if (window >= 2) {
      vs.push_back(v);
      hvs.push_back(hv);
      if (vs.size() == window) {
        ParameterVector next = ritz_restart(vs, hvs);
        restrict_to(next);
        vs.clear();
        hvs.clear();
        const double nn = norm(next);
        if (nn > 0.0) {
          v = (1.0 / nn) * std::move(next);
          continue;
        }
      }
    }
    hv.add_scaled(sigma, v);
    restrict_to(hv);
    const double nn = norm(hv);
    if (nn == 0.0) break;
    hv *= 1.0 / nn;
    v = std::move(hv);
  }
  std::ostringstream tol;
  tol << cfg.tol;
  throw NoConvergence("power iteration did not reach tolerance " + tol.str() +
                      " in " + std::to_string(cfg.max_iters) + " iterations");
}

LinearOperator hessian_operator(const LossOracle& oracle, const ParameterVector& theta) {
  return [&oracle, &theta](const ParameterVector& v) { return oracle.hvp(theta, v); };
}

void check_gap(double lambda1, double lambda2) {
  if (lambda1 - lambda2 < kDegenerateGap * std::max(1.0, std::abs(lambda1))) {
    throw DegenerateSpectrum("top Hessian eigenvalue is not unique (lambda1=" +
                             std::to_string(lambda1) + ", lambda2=" + std::to_string(lambda2) + ")");
  }
}

EigSolverConfig loose_second(EigSolverConfig cfg) {
  cfg.tol = std::max(cfg.tol, cfg.second_tol);
  return cfg;
}

}  // namespace

EigenPair top_eigpair(const LinearOperator& op, std::size_t dim, const EigSolverConfig& cfg,
                      const ParameterVector* warm_start) {
  ParameterVector start = warm_start ? *warm_start : random_unit(dim, cfg.seed);
  return power_iterate(op, std::move(start), cfg, nullptr);
}

EigenPair second_eigpair(const LinearOperator& op, const ParameterVector& u,
                         const EigSolverConfig& cfg, const ParameterVector* warm_start) {
  auto deflated = [&](const ParameterVector& v) {
    return project_out(op(project_out(v, u)), u);
  };
  ParameterVector start = warm_start ? *warm_start : random_unit(u.size(), cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  return power_iterate(deflated, std::move(start), cfg, &u);
}

EigenPair top_eigpair(const LossOracle& oracle, const ParameterVector& theta,
                      const EigSolverConfig& cfg, const ParameterVector* warm_start) {
  const auto op = hessian_operator(oracle, theta);
  EigenPair top = top_eigpair(op, oracle.dim(), cfg, warm_start);
  if (cfg.deflation && oracle.dim() > 1) {
    check_gap(top.value, second_eigpair(op, top.vector, loose_second(cfg)).value);
  }
  return top;
}

double second_eigenvalue(const LossOracle& oracle, const ParameterVector& theta,
                         const EigSolverConfig& cfg, const EigenPair& known) {
  if (oracle.dim() == 1) return -std::numeric_limits<double>::infinity();
  return second_eigpair(hessian_operator(oracle, theta), known.vector, cfg).value;
}

std::pair<double, double> lanczos_extremes(const LinearOperator& op, std::size_t dim, int steps,
                                           std::uint64_t seed) {
  const int m = static_cast<int>(std::min<std::size_t>(dim, static_cast<std::size_t>(std::max(1, steps))));
  std::vector<ParameterVector> q;
  q.reserve(static_cast<std::size_t>(m));
  q.push_back(random_unit(dim, seed));
  std::vector<double> a, b;
  for (int j = 0; j < m; ++j) {
    ParameterVector w = op(q.back());
    a.push_back(dot(w, q.back()));
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& qi : q) w.add_scaled(-dot(w, qi), qi);
    }
    const double beta = norm(w);
    if (j + 1 == m || beta <= 1e-12 * std::max(1.0, std::abs(a.back()))) break;
    b.push_back(beta);
    w *= 1.0 / beta;
    q.push_back(std::move(w));
  }
  const Eigen::Index k = static_cast<Eigen::Index>(a.size());
  Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(a.data(), k);
  Eigen::VectorXd sub = k > 1 ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(b.data(), k - 1)) : Eigen::VectorXd(0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  return {es.eigenvalues()(0), es.eigenvalues()(k - 1)};
}

double min_eigenvalue(const LossOracle& oracle, const ParameterVector& theta,
                      const EigSolverConfig& cfg) {
  auto negated = [&](const ParameterVector& v) { return -1.0 * oracle.hvp(theta, v); };
  try {
    return -top_eigpair(negated, oracle.dim(), cfg).value;
  } catch (const NoConvergence&) {
    auto op = [&](const ParameterVector& v) { return oracle.hvp(theta, v); };
    return lanczos_extremes(op, oracle.dim(), 80, cfg.seed).first;
  }
}

ParameterVector fix_sign(const ParameterVector& u_new, const ParameterVector* u_prev) {
  if (u_prev && dot(u_new, *u_prev) < 0.0) return -u_new;
  return u_new;
}

SpectralInfo spectral_info(const LossOracle& oracle, const ParameterVector& theta,
                           const EigSolverConfig& cfg, const SpectralInfo* prev) {
  const auto op = hessian_operator(oracle, theta);
  EigenPair top = top_eigpair(op, oracle.dim(), cfg, prev ? &prev->u : nullptr);

  SpectralInfo info;
  info.sharpness = top.value;
  info.grad_sharpness = oracle.third_contract(theta, top.vector, top.vector);
  if (prev) {
    info.u = fix_sign(top.vector, &prev->u);
  } else {
    info.u = std::move(top.vector);
    const double along = dot(info.grad_sharpness, info.u);
    // below √tol the sign of ∇S·u is eigenvector noise, not signal
    if (std::abs(along) > std::sqrt(cfg.tol) * norm(info.grad_sharpness)) {
      if (along < 0.0) info.u *= -1.0;
    } else {
      const auto it = std::max_element(info.u.begin(), info.u.end(),
                                       [](double a, double b) { return std::abs(a) < std::abs(b); });
      if (*it < 0.0) info.u *= -1.0;
    }
  }

  if (cfg.deflation && oracle.dim() > 1) {
    const ParameterVector* warm2 = (prev && prev->u2.size() == oracle.dim()) ? &prev->u2 : nullptr;
    EigenPair second = second_eigpair(op, info.u, loose_second(cfg), warm2);
    info.lambda2 = second.value;
    info.u2 = std::move(second.vector);
    check_gap(info.sharpness, info.lambda2);
  } else if (oracle.dim() == 1) {
    info.lambda2 = -std::numeric_limits<double>::infinity();
  } else {
    info.lambda2 = std::numeric_limits<double>::quiet_NaN();
  }
  return info;
}

}  // namespace eos
