#include "eos/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace eos {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kManifoldTol = 1e-6;
constexpr double kCoarseTol = 1e-6;
constexpr int kExtraRounds = 10;  // refinement rounds allowed past the requested count

EigSolverConfig top_only(EigSolverConfig cfg) {
  cfg.deflation = false;
  return cfg;
}

}  // namespace

void RunConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be a positive number");
  if (max_steps < 0 || max_phase1_steps < 0) throw ConfigError("step limits must be nonnegative");
  if (!(stop_lambda2_frac > 0.0 && stop_lambda2_frac < 2.0)) {
    throw ConfigError("stop_lambda2_frac must lie in (0, 2)");
  }
  if (projection_substeps < 1) throw ConfigError("projection_substeps must be >= 1");
  if (flow_substeps < 1) throw ConfigError("flow_substeps must be >= 1");
  if (!(margin >= 0.0 && margin < 1.0)) throw ConfigError("margin must lie in [0, 1)");
  if (closed_form_stride < 0) throw ConfigError("closed_form_stride must be >= 0");
  if (profile_samples < 9 || profile_samples % 2 == 0) {
    throw ConfigError("profile_samples must be odd and >= 9");
  }
  if (eig.max_iters < 1 || !(eig.tol > 0.0)) throw ConfigError("eigensolver tolerances invalid");
}

ParameterVector gd_step(const LossOracle& oracle, const ParameterVector& theta, double eta) {
  ParameterVector next = theta;
  next.add_scaled(-eta, oracle.gradient(theta));
  return next;
}

ParameterVector flow_step(const LossOracle& oracle, const ParameterVector& theta, double eta,
                          int substeps) {
  if (substeps < 1) throw DomainError("flow_step needs substeps >= 1");
  const double h = eta / substeps;
  ParameterVector p = theta;
  for (int i = 0; i < substeps; ++i) {
    const ParameterVector k1 = -oracle.gradient(p);
    const ParameterVector k2 = -oracle.gradient(p + (h / 2) * k1);
    const ParameterVector k3 = -oracle.gradient(p + (h / 2) * k2);
    const ParameterVector k4 = -oracle.gradient(p + h * k3);
    p.add_scaled(h / 6, k1);
    p.add_scaled(h / 3, k2);
    p.add_scaled(h / 3, k3);
    p.add_scaled(h / 6, k4);
  }
  if (!p.all_finite()) throw NonFinite("gradient flow left the finite range");
  return p;
}

std::pair<double, double> manifold_residuals(const LossOracle& oracle, const ParameterVector& theta,
                                             const SpectralInfo& spectral, double eta) {
  const double target = 2.0 / eta;
  const ParameterVector g = oracle.gradient(theta);
  const double gu = std::abs(dot(spectral.u, g));
  const double gn = norm(g);
  return {std::abs(spectral.sharpness - target) / target, gu == 0.0 ? 0.0 : gu / gn};
}

namespace {

void newton_along_u(const LossOracle& oracle, ParameterVector& p, const ParameterVector& u) {
  const double g = dot(u, oracle.gradient(p));
  const double curvature = dot(u, oracle.hvp(p, u));
  if (curvature != 0.0) p.add_scaled(-g / curvature, u);
}

}  // namespace

Projection project_to_manifold(const LossOracle& oracle, const ParameterVector& theta,
                               const RunConfig& cfg, const SpectralInfo* prev, int rounds) {
  if (rounds <= 0) rounds = cfg.projection_substeps;
  const double target = 2.0 / cfg.eta;
  const EigSolverConfig top_cfg = top_only(cfg.eig);

  // Rounds past the requested count only run while the residuals are still
  // above tolerance; far from the manifold the linearization needs a few more.
  const int max_rounds = rounds + kExtraRounds;
  ParameterVector p = theta;
  // Early rounds only need a rough u and ∇S; the round that lands the point and
  // the residual checks use the full tolerance.
  EigSolverConfig coarse_cfg = top_cfg;
  coarse_cfg.tol = std::max(top_cfg.tol, kCoarseTol);
  SpectralInfo last = spectral_info(oracle, p, rounds > 1 ? coarse_cfg : top_cfg, prev);
  int done = 0;
  for (; done < max_rounds; ++done) {
    const double n2 = dot(last.grad_sharpness, last.grad_sharpness);
    if (n2 > 0.0) p.add_scaled(-(last.sharpness - target) / n2, last.grad_sharpness);
    newton_along_u(oracle, p, last.u);
    if (!p.all_finite()) throw ProjectionDiverged("projection produced non-finite parameters");
    last = spectral_info(oracle, p, done + 2 >= rounds ? top_cfg : coarse_cfg, &last);
    if (done + 1 >= rounds) {
      const auto [s_res, u_res] = manifold_residuals(oracle, p, last, cfg.eta);
      if (s_res <= kManifoldTol && u_res <= kManifoldTol) {
        ++done;
        break;
      }
    }
  }

  Projection out{p, spectral_info(oracle, p, cfg.eig, &last)};
  const auto [s_res, u_res] = manifold_residuals(oracle, out.theta, out.spectral, cfg.eta);
  if (!(s_res <= kManifoldTol) || !(u_res <= kManifoldTol)) {
    throw ProjectionDiverged("projection missed the manifold after " + std::to_string(done) +
                             " rounds (|S-2/eta| rel " + std::to_string(s_res) + ", |u.grad| rel " +
                             std::to_string(u_res) + ")");
  }
  return out;
}

Projection newton_u_projection(const LossOracle& oracle, const ParameterVector& theta,
                               const RunConfig& cfg, const SpectralInfo* prev) {
  const EigSolverConfig top_cfg = top_only(cfg.eig);
  ParameterVector p = theta;
  SpectralInfo last;
  const SpectralInfo* ref = prev;
  for (int r = 0; r < cfg.projection_substeps; ++r) {
    last = spectral_info(oracle, p, top_cfg, ref);
    ref = &last;
    newton_along_u(oracle, p, last.u);
    if (!p.all_finite()) throw ProjectionDiverged("instability probe produced non-finite parameters");
  }
  return {p, spectral_info(oracle, p, top_cfg, ref)};
}

Projection constrained_step(const LossOracle& oracle, const ParameterVector& theta_dagger,
                            const RunConfig& cfg, const SpectralInfo& prev) {
  return project_to_manifold(oracle, gd_step(oracle, theta_dagger, cfg.eta), cfg, &prev);
}

std::vector<const TrajectoryRecord*> RunLog::phase2() const {
  std::vector<const TrajectoryRecord*> out;
  if (!reached_instability) return out;
  for (const auto& r : records) {
    if (r.t >= 0) out.push_back(&r);
  }
  return out;
}

namespace {

void fill_nan(TrajectoryRecord& r) {
  r.probe_sharpness = r.loss_dagger = r.x = r.y = r.dev_norm = kNaN;
  r.s_residual = r.u_residual = r.loss_flow = r.dev_flow = kNaN;
  r.x_star = r.y_star = r.pred_loss = r.pred_sharp = r.dev_pred = kNaN;
  r.gen_x_star = r.gen_y_star = r.gen_pred_loss = r.gen_pred_sharp = kNaN;
  r.y_star_closed_form = kNaN;
  r.spectral.sharpness = r.spectral.lambda2 = kNaN;
  r.tq.alpha = r.tq.beta = r.tq.delta = r.tq.eps = r.tq.loss = r.tq.sharpness = kNaN;
}

}  // namespace

RunLog run_experiment(const LossOracle& oracle, const ParameterVector& theta_init,
                      const RunConfig& cfg) {
  cfg.validate();
  if (theta_init.size() != oracle.dim()) throw ConfigError("initial point has the wrong dimension");

  RunLog log;
  const double eta = cfg.eta;
  const double target = 2.0 / eta;
  const EigSolverConfig top_cfg = top_only(cfg.eig);
  long current_step = 0;

  ParameterVector theta = theta_init;
  ParameterVector warm;
  auto sharpness_at = [&](const ParameterVector& p) {
    EigenPair top = top_eigpair(oracle, p, top_cfg, warm.empty() ? nullptr : &warm);
    warm = top.vector;
    return top.value;
  };

  try {
    // Phase 1: plain GD until the Newton-in-u probe reaches 2/η.
    bool found = false;
    for (long k = 0; k <= cfg.max_phase1_steps; ++k) {
      current_step = k;
      TrajectoryRecord rec;
      fill_nan(rec);
      rec.t = k;
      rec.theta = theta;
      rec.loss = oracle.value(theta);
      rec.sharpness = sharpness_at(theta);
      if (rec.sharpness >= target * (1.0 - cfg.margin)) {
        const Projection probe = newton_u_projection(oracle, theta, cfg);
        rec.probe_sharpness = probe.spectral.sharpness;
        if (probe.spectral.sharpness >= target * (1.0 - kManifoldTol)) {
          found = true;
          break;
        }
      }
      log.records.push_back(std::move(rec));
      if (k == cfg.max_phase1_steps) break;
      theta = gd_step(oracle, theta, eta);
    }
    if (!found) {
      log.stop_reason = "stable";
      return log;
    }
    const long k0 = static_cast<long>(log.records.size());
    for (auto& r : log.records) r.t -= k0;
    log.reached_instability = true;

    // Phase 2.
    current_step = 0;
    Projection dag = project_to_manifold(oracle, theta, cfg, nullptr,
                                         std::max(cfg.projection_substeps, 10));
    log.v0 = theta - dag.theta;
    TaylorQuantities tq = taylor_at(oracle, dag.theta, dag.spectral, eta);
    PredictedState pred = initial_predicted_state(log.v0, tq);
    PredictedState gen = pred;
    bool pred_on = cfg.run_predicted;
    bool gen_on = cfg.run_generalized;
    ParameterVector flow = theta;

    std::vector<TaylorQuantities> tq_hist{tq};
    std::vector<double> x_hist;
    std::vector<ParameterVector> dag_hist;
    double y_cf = kNaN;

    for (long t = 0;; ++t) {
      current_step = t;
      TrajectoryRecord rec;
      fill_nan(rec);
      rec.t = t;
      rec.theta = theta;
      rec.theta_dagger = dag.theta;
      rec.loss = oracle.value(theta);
      rec.sharpness = sharpness_at(theta);
      rec.loss_dagger = tq.loss;
      rec.spectral = dag.spectral;
      rec.tq = tq;
      const ParameterVector v = theta - dag.theta;
      rec.x = dot(tq.u, v);
      rec.y = dot(tq.grad_S_perp, v);
      rec.dev_norm = norm(v);
      std::tie(rec.s_residual, rec.u_residual) = manifold_residuals(oracle, dag.theta, dag.spectral, eta);
      rec.alpha_nonpositive = !(tq.alpha > 0.0);
      if (cfg.run_flow) {
        rec.loss_flow = oracle.value(flow);
        rec.dev_flow = norm(theta - flow);
      }
      if (pred_on) {
        rec.x_star = pred.x_star;
        rec.y_star = pred.y_star;
        rec.pred_loss = predicted_loss(tq.loss, pred, eta);
        rec.pred_sharp = predicted_sharpness(tq, pred, eta);
        rec.dev_pred = norm(v - pred.v_star);
        rec.v_star = pred.v_star;
      }
      Profile1D profile;
      if (gen_on) {
        const double hw = std::max({4.0 * tq.delta, 1.25 * std::abs(gen.x_star), 1e-8});
        profile = profile_1d(oracle, dag.theta, tq.u, eta, hw, cfg.profile_samples).even_part();
        rec.gen_x_star = gen.x_star;
        rec.gen_y_star = gen.y_star;
        rec.gen_pred_loss = predicted_loss(tq.loss, gen, eta) + profile.value(gen.x_star);
        rec.gen_pred_sharp = predicted_sharpness(tq, gen, eta, &profile);
      }
      rec.y_star_closed_form = y_cf;
      log.records.push_back(std::move(rec));
      x_hist.push_back(pred.x_star);
      dag_hist.push_back(dag.theta);

      if (dag.spectral.lambda2 >= cfg.stop_lambda2_frac / eta) {
        log.stop_reason = "lambda2";
        break;
      }
      if (t >= cfg.max_steps) {
        log.stop_reason = "max_steps";
        break;
      }

      ParameterVector theta_next = gd_step(oracle, theta, eta);
      Projection dag_next = constrained_step(oracle, dag.theta, cfg, dag.spectral);
      TaylorQuantities tq_next = taylor_at(oracle, dag_next.theta, dag_next.spectral, eta);
      if (tq_next.loss > tq.loss) ++log.dagger_descent_violations;
      const ParameterVector& here = dag.theta;
      const HessianApply hess = [&](const ParameterVector& w) { return oracle.hvp(here, w); };
      if (pred_on) {
        try {
          pred = predicted_step(tq, tq_next, pred, eta, hess);
        } catch (const NonFinite&) {
          pred_on = false;
          log.predicted_breakdown_step = t + 1;
        }
      }
      if (gen_on) {
        try {
          gen = generalized_predicted_step(tq, tq_next, gen, eta, hess, profile);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::non_finite && e.kind() != ErrorKind::profile_range_exceeded) throw;
          gen_on = false;
          log.generalized_breakdown_step = t + 1;
        }
      }
      if (cfg.run_flow) flow = flow_step(oracle, flow, eta, cfg.flow_substeps);
      tq_hist.push_back(tq_next);

      y_cf = kNaN;
      if (pred_on && cfg.closed_form_stride > 0 && (t + 1) % cfg.closed_form_stride == 0) {
        y_cf = xy_closed_form(tq_hist, x_hist, log.v0, eta, static_cast<std::size_t>(t),
                              [&](std::size_t s, const ParameterVector& w) {
                                return oracle.hvp(dag_hist[s], w);
                              });
      }
      theta = std::move(theta_next);
      dag = std::move(dag_next);
      tq = std::move(tq_next);
    }
  } catch (const Error& e) {
    log.error = RunError{e.kind(), e.what(), current_step};
    log.stop_reason = "error";
  }
  return log;
}

}  // namespace eos
