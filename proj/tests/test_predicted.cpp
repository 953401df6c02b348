#include <doctest.h>

#include <cmath>
#include <random>

#include "eos/error.hpp"
#include "eos/predicted.hpp"
#include "support.hpp"

using namespace eos;

namespace {

TaylorQuantities toy_tq(double eta, double alpha, double beta, double z = 0.0) {
  const ToyLoss toy({eta, alpha, beta});
  const ParameterVector th{0, 0, z};
  EigSolverConfig cfg;
  cfg.tol = 1e-13;
  return taylor_at(toy, th, spectral_info(toy, th, cfg), eta);
}

HessianApply toy_hessian(double eta) {
  return [eta](const ParameterVector& v) { return ParameterVector{2.0 / eta * v[0], 0.0, 0.0}; };
}

PredictedState state_with(double x, const TaylorQuantities& tq) {
  return initial_predicted_state(x * tq.u, tq);
}

}  // namespace

TEST_CASE("taylor quantities") {
  const TaylorQuantities tq = toy_tq(0.01, 1.0, 1.0);
  CHECK(tq.alpha == doctest::Approx(1.0));
  CHECK(tq.beta == doctest::Approx(1.0));
  CHECK(tq.delta == doctest::Approx(std::sqrt(2.0)));
  CHECK(norm(tq.grad_S_perp - ParameterVector{0, 1, 0}) < 1e-12);
  CHECK(std::abs(dot(tq.grad_S_perp, tq.u)) < 1e-10);
  CHECK(tq.eps == doctest::Approx(0.01));
  CHECK(toy_tq(0.01, 2.0, 1.0).delta == doctest::Approx(2.0));

  const auto q = QuadraticLoss::diagonal({4, 1});
  const TaylorQuantities tq2 = taylor_at(q, {1, 1}, spectral_info(q, {1, 1}, EigSolverConfig{}), 0.5);
  CHECK(tq2.alpha == 0.0);
  CHECK(tq2.beta == 0.0);
  CHECK(tq2.delta == 0.0);
}

TEST_CASE("predicted step examples on the toy model") {
  const double eta = 0.01;
  const TaylorQuantities tq = toy_tq(eta, 1.0, 1.0);
  const TaylorQuantities tq1 = toy_tq(eta, 1.0, 1.0, -eta);

  const PredictedState a = predicted_step(tq, tq1, state_with(0.1, tq), eta, toy_hessian(eta));
  CHECK(a.x_star == doctest::Approx(-0.1));

  const PredictedState b = predicted_step(tq, tq1, state_with(tq.delta, tq), eta, toy_hessian(eta));
  CHECK(std::abs(b.y_star) < 1e-14);

  const PredictedState c = predicted_step(tq, tq1, state_with(0.0, tq), eta, toy_hessian(eta));
  CHECK(c.y_star == doctest::Approx(eta * 1.0));
  CHECK(c.source_history.size() == 1);
}

TEST_CASE("sign alternation and reduced recursion") {
  const double eta = 0.02;
  const TaylorQuantities tq = toy_tq(eta, 1.0, 1.0);
  PredictedState s = state_with(0.01, tq);
  for (int t = 0; t < 500; ++t) {
    const PredictedState n = predicted_step(tq, tq, s, eta, toy_hessian(eta));
    CHECK(std::abs(n.x_star + (1 + eta * s.y_star) * s.x_star) <= 1e-12 * std::max(1.0, std::abs(n.x_star)));
    // toy: y_{t+1} = y_t + η(α − β x_t²/2)
    CHECK(std::abs(n.y_star - (s.y_star + eta * (1.0 - s.x_star * s.x_star / 2))) < 1e-10);
    if (1 + eta * s.y_star > 0 && s.x_star != 0) CHECK(n.x_star * s.x_star < 0);
    s = n;
  }
}

TEST_CASE("unfolded sum equals iterated y* with varying operators (mlp)") {
  const auto mlp = test::small_mlp(Activation::tanh, MlpLossKind::mse, 5, 30);
  const double eta = 0.3;
  std::mt19937_64 rng(1);
  std::vector<ParameterVector> points;
  ParameterVector th = mlp->initial_parameters(2);
  for (int t = 0; t < 12; ++t) {
    points.push_back(th);
    th.add_scaled(-eta, mlp->gradient(th));
  }
  std::vector<TaylorQuantities> tq;
  const SpectralInfo* prev = nullptr;
  std::vector<SpectralInfo> infos;
  infos.reserve(points.size());
  EigSolverConfig cfg;
  cfg.deflation = false;
  for (const auto& p : points) {
    infos.push_back(spectral_info(*mlp, p, cfg, prev));
    prev = &infos.back();
    tq.push_back(taylor_at(*mlp, p, infos.back(), eta));
  }
  const ParameterVector v0 = 0.05 * test::random_vector(mlp->dim(), rng);
  PredictedState s = initial_predicted_state(v0, tq[0]);
  std::vector<double> xs;
  for (std::size_t t = 0; t + 1 < points.size(); ++t) {
    xs.push_back(s.x_star);
    const auto& here = points[t];
    s = predicted_step(tq[t], tq[t + 1], s, eta, [&](const ParameterVector& v) { return mlp->hvp(here, v); });
    CHECK(std::abs(s.x_star - dot(tq[t + 1].u, s.v_star)) < 1e-12);
    const double cf = xy_closed_form(tq, xs, v0, eta, t, [&](std::size_t k, const ParameterVector& v) {
      return mlp->hvp(points[k], v);
    });
    CHECK(std::abs(cf - s.y_star) <= 1e-8 * std::max(1.0, std::abs(s.y_star)));
  }
}

TEST_CASE("closed form on the toy model reduces to the cumulative sum") {
  const double eta = 0.02;
  const TaylorQuantities tq = toy_tq(eta, 1.0, 1.0);
  std::vector<TaylorQuantities> hist(41, tq);
  PredictedState s = state_with(0.3, tq);
  std::vector<double> xs;
  double cumulative = 0.0;
  for (std::size_t t = 0; t < 40; ++t) {
    xs.push_back(s.x_star);
    cumulative += eta * 1.0 * (2.0 - s.x_star * s.x_star) / 2;
    s = predicted_step(tq, tq, s, eta, toy_hessian(eta));
    const double cf = xy_closed_form(hist, xs, 0.3 * tq.u, eta, t,
                                     [&](std::size_t, const ParameterVector& v) { return toy_hessian(eta)(v); });
    CHECK(cf == doctest::Approx(cumulative).epsilon(1e-12));
  }
  // t = 0 with x₀ = δ gives y*₁ = 0
  const std::vector<double> x0{tq.delta};
  CHECK(std::abs(xy_closed_form(hist, x0, tq.delta * tq.u, eta, 0,
                                [&](std::size_t, const ParameterVector& v) { return toy_hessian(eta)(v); })) < 1e-14);
}

TEST_CASE("profile of the toy model vanishes, quartic profile is recovered") {
  const double eta = 0.01;
  const ToyLoss toy({eta, 1.0, 1.0});
  const ParameterVector th{0, 0, 0.3};
  const Profile1D p = profile_1d(toy, th, {1, 0, 0}, eta, 4 * toy.delta());
  CHECK(p.xs().size() == 41);
  CHECK(p.values()[20] == 0.0);
  CHECK(p.identically_zero());
  CHECK(p.xs().front() == doctest::Approx(-p.xs().back()));

  const double rho4 = 0.75;
  const ToyLoss quartic({eta, 1.0, 1.0}, -rho4);
  const Profile1D q = profile_1d(quartic, th, {1, 0, 0}, eta, 4 * quartic.delta());
  for (std::size_t i = 0; i < q.xs().size(); ++i) {
    const double x = q.xs()[i];
    CHECK(std::abs(q.values()[i] + rho4 * std::pow(x, 4) / 24) < 1e-8);
  }
  for (double x : {0.0, 0.3, -1.1, 1.41421356, 5.0}) {
    CHECK(std::abs(q.value(x) + rho4 * std::pow(x, 4) / 24) < 1e-8);
    CHECK(std::abs(q.derivative(x) + rho4 * std::pow(x, 3) / 6) < 1e-7);
    CHECK(std::abs(q.second_derivative(x) + rho4 * x * x / 2) < 1e-6);
  }
  const Profile1D e = q.even_part();
  CHECK(e.values() == q.values());
}

TEST_CASE("profile argument checks") {
  const ToyLoss toy({0.01, 1.0, 1.0});
  CHECK_THROWS_AS(profile_1d(toy, {0, 0, 0}, {1, 0, 0}, 0.01, 0.0), DomainError);
  CHECK_THROWS_AS(profile_1d(toy, {0, 0, 0}, {1, 0, 0}, 0.01, 1.0, 40), DomainError);
  CHECK_THROWS_AS(profile_1d(toy, {0, 0, 0}, {1, 0, 0}, 0.01, 1.0, 7), DomainError);
}

TEST_CASE("generalized step") {
  const double eta = 0.02;
  const TaylorQuantities tq = toy_tq(eta, 1.0, 1.0);
  const Profile1D zero(std::vector<double>{-3, -2, -1, 0, 1, 2, 3}, std::vector<double>(7, 0.0));
  PredictedState s = state_with(0.2, tq);
  PredictedState g = s;
  for (int t = 0; t < 50; ++t) {
    s = predicted_step(tq, tq, s, eta, toy_hessian(eta));
    g = generalized_predicted_step(tq, tq, g, eta, toy_hessian(eta), zero);
    CHECK(s.v_star == g.v_star);
    CHECK(s.x_star == g.x_star);
    CHECK(s.y_star == g.y_star);
  }

  const double rho4 = 0.75;
  const ToyLoss quartic({eta, 1.0, 1.0}, -rho4);
  const Profile1D prof = profile_1d(quartic, {0, 0, 0}, {1, 0, 0}, eta, 4 * tq.delta);
  const double d = tq.delta;
  const double y_fp = -prof.derivative(d) / d;
  PredictedState fp = initial_predicted_state(ParameterVector{d, y_fp, 0}, tq);
  const PredictedState next = generalized_predicted_step(tq, tq, fp, eta, toy_hessian(eta), prof);
  CHECK(std::abs(fp.x_star) == doctest::Approx(d).epsilon(1e-12));
  CHECK(next.x_star == doctest::Approx(-fp.x_star).epsilon(1e-9));
  CHECK(predicted_sharpness(tq, fp, eta, &prof) ==
        doctest::Approx(2 / eta - rho4 * d * d / 3).epsilon(1e-9));

  PredictedState far = state_with(100.0, tq);
  CHECK_THROWS_AS(generalized_predicted_step(tq, tq, far, eta, toy_hessian(eta), prof), ProfileRangeExceeded);
}

TEST_CASE("predicted sharpness and loss formulas") {
  const double eta = 0.01;
  const TaylorQuantities tq = toy_tq(eta, 1.0, 1.0, 0.4);
  PredictedState s;
  CHECK(predicted_sharpness(tq, s, eta) == 2 / eta);
  s.y_star = 0.5;
  s.x_star = 0.3;
  CHECK(predicted_sharpness(tq, s, eta) == doctest::Approx(2 / eta + 0.5));
  CHECK(predicted_loss(tq.loss, PredictedState{}, eta) == tq.loss);
  s.x_star = 0.1;
  CHECK(predicted_loss(tq.loss, s, eta) == doctest::Approx(0.4 + 1.0));
  const ToyLoss toy({eta, 1.0, 1.0});
  CHECK(toy.value({0.1, 0, 0.4}) == doctest::Approx(predicted_loss(tq.loss, s, eta)));
  s.x_star = tq.delta;
  CHECK(predicted_loss(tq.loss, s, eta) - tq.loss == doctest::Approx(tq.delta * tq.delta / eta));
}

TEST_CASE("predicted step reports blow-up") {
  const double eta = 0.01;
  const TaylorQuantities tq = toy_tq(eta, 1.0, 1.0);
  PredictedState s = state_with(1e200, tq);
  s.y_star = 1e200;
  CHECK_THROWS_AS(predicted_step(tq, tq, s, eta, toy_hessian(eta)), NonFinite);
}
