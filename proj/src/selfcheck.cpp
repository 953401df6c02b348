#include "eos/selfcheck.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "eos/error.hpp"
#include "eos/kernels.hpp"
#include "eos/losses.hpp"
#include "eos/ode.hpp"
#include "eos/spectral.hpp"
#include "eos/trajectory.hpp"

namespace eos {

namespace {

struct Check {
  std::string name;
  std::function<bool(std::string&)> body;
};

bool kernels_agree(std::string& detail) {
  if (!kernels::avx2_available()) {
    detail = "avx2 not available, scalar only";
    return true;
  }
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> a(1003), b(1003);
  for (auto& x : a) x = u(rng);
  for (auto& x : b) x = u(rng);
  const double s = kernels::scalar_table().dot(a.data(), b.data(), a.size());
  const double v = kernels::avx2_table().dot(a.data(), b.data(), a.size());
  detail = "dot diff " + std::to_string(std::abs(s - v));
  return std::abs(s - v) <= 1e-12 * (1 + std::abs(s));
}

bool self_stabilization(std::string& detail) {
  const ToyLoss toy({0.01, 1.0, 1.0}, -0.5);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  double worst = 0.0;
  EigSolverConfig cfg;
  cfg.deflation = false;
  for (int i = 0; i < 10; ++i) {
    const ParameterVector th{n(rng), n(rng), n(rng)};
    const SpectralInfo info = spectral_info(toy, th, cfg);
    ParameterVector fd(3);
    const double h = 1e-4 * (1 + norm_inf(th));
    for (std::size_t k = 0; k < 3; ++k) {
      ParameterVector p = th, m = th;
      p[k] += h;
      m[k] -= h;
      fd[k] = (top_eigpair(toy, p, cfg, &info.u).value - top_eigpair(toy, m, cfg, &info.u).value) / (2 * h);
    }
    worst = std::max(worst, norm(info.grad_sharpness - fd) / std::max(1.0, norm(fd)));
  }
  detail = "max rel err " + std::to_string(worst);
  return worst < 1e-3;
}

bool eigensolver_matches_dense(std::string& detail) {
  const std::size_t n = 40;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd q = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return nd(rng); });
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(q);
  const Eigen::MatrixXd Q = qr.householderQ();
  Eigen::VectorXd d(n);
  for (std::size_t i = 0; i < n; ++i) d(i) = 10.0 - 0.2 * static_cast<double>(i);
  const Eigen::MatrixXd a = Q * d.asDiagonal() * Q.transpose();
  std::vector<double> flat(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) flat[i * n + j] = 0.5 * (a(i, j) + a(j, i));
  const QuadraticLoss quad(n, flat);
  EigSolverConfig cfg;
  cfg.tol = 1e-11;
  const ParameterVector zero(n);
  const EigenPair top = top_eigpair(quad, zero, cfg);
  const double l2 = second_eigenvalue(quad, zero, cfg, top);
  detail = "lambda1 " + std::to_string(top.value) + " lambda2 " + std::to_string(l2);
  return std::abs(top.value - 10.0) < 1e-8 * 10 && std::abs(l2 - 9.8) < 1e-8 * 9.8;
}

bool toy_projection(std::string& detail) {
  RunConfig cfg;
  cfg.eta = 0.01;
  const ToyLoss toy({cfg.eta, 1.0, 1.0});
  const Projection p = project_to_manifold(toy, ParameterVector{0.0, 0.3, 0.7}, cfg);
  const Projection s = constrained_step(toy, p.theta, cfg, p.spectral);
  detail = "|proj - (0,0,z)| " + std::to_string(norm(p.theta - ParameterVector{0, 0, 0.7}));
  return norm(p.theta - ParameterVector{0, 0, 0.7}) < 1e-6 &&
         norm(s.theta - ParameterVector{0, 0, 0.7 - cfg.eta}) < 1e-8;
}

bool ode_conservation(std::string& detail) {
  const double delta = std::sqrt(2.0);
  const auto traj = integrate({0.1 * delta, 0.0}, 1.0, 1.0, 10.0, 1e-3);
  const double g0 = potential(traj.front(), 1.0, 1.0);
  double drift = 0.0;
  for (const auto& s : traj) drift = std::max(drift, std::abs(potential(s, 1.0, 1.0) - g0));
  detail = "drift " + std::to_string(drift / 10.0) + " per unit time";
  return drift / 10.0 < 1e-8 * std::max(1.0, g0);
}

bool descent_lemma(std::string& detail) {
  const double eta = 0.1;
  const auto quad = QuadraticLoss::diagonal({15.0, 5.0, 1.0, 0.1});
  const double ell = 15.0;
  ParameterVector th{1.0, -2.0, 3.0, 0.5};
  double worst = -1.0;
  for (int t = 0; t < 200; ++t) {
    const ParameterVector g = quad.gradient(th);
    const ParameterVector next = gd_step(quad, th, eta);
    const double slack = quad.value(th) - eta * (2 - eta * ell) / 2 * dot(g, g) - quad.value(next);
    worst = std::max(worst, -slack);
    th = next;
  }
  detail = "max violation " + std::to_string(std::max(worst, 0.0));
  return worst <= 1e-14;
}

}  // namespace

int run_self_check(std::ostream& out) {
  const std::vector<Check> checks{
      {"kernels scalar/avx2 agree", kernels_agree},
      {"grad S equals third derivative (u,u)", self_stabilization},
      {"eigensolver matches dense reference", eigensolver_matches_dense},
      {"toy projection lands on (0,0,z)", toy_projection},
      {"ODE potential conserved", ode_conservation},
      {"GD descent inequality on quadratic", descent_lemma},
  };
  int failures = 0;
  for (const auto& c : checks) {
    std::string detail;
    bool ok = false;
    try {
      ok = c.body(detail);
    } catch (const std::exception& e) {
      detail = std::string("threw: ") + e.what();
    }
    failures += ok ? 0 : 1;
    out << (ok ? "PASS " : "FAIL ") << c.name << " (" << detail << ")\n";
  }
  out << (failures == 0 ? "all checks passed" : std::to_string(failures) + " check(s) failed") << '\n';
  return failures;
}

}  // namespace eos
