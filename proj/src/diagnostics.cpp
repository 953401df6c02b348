#include "eos/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "eos/error.hpp"

namespace eos {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ParameterVector random_unit(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> normal;
  ParameterVector v(n);
  for (double& x : v) x = normal(rng);
  return normalized(std::move(v));
}

}  // namespace

RhoEstimate estimate_rho3_rho4(const LossOracle& oracle, const ParameterVector& theta, int n_probes,
                               double radius, std::uint64_t seed) {
  RhoEstimate est;
  est.probes = n_probes;
  const std::size_t n = oracle.dim();
  for (int i = 0; i < n_probes; ++i) {
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(i));
    const ParameterVector v = random_unit(rng, n);
    const ParameterVector w = random_unit(rng, n);
    const ParameterVector d = random_unit(rng, n);

    const ParameterVector t0 = oracle.third_contract(theta, v, w);
    double best = norm(t0);
    ParameterVector s = normalized(v + w);
    for (int k = 0; k < 8 && norm(s) > 0.0; ++k) {
      ParameterVector ts = oracle.third_contract(theta, s, s);
      const double val = norm(ts);
      best = std::max(best, val);
      if (val == 0.0) break;
      s = normalized(std::move(ts));
    }
    est.rho3 = std::max(est.rho3, best);

    ParameterVector shifted = theta;
    shifted.add_scaled(radius, d);
    const double lip = norm(oracle.third_contract(shifted, v, w) - t0) / radius;
    est.rho4 = std::max(est.rho4, lip);
  }
  return est;
}

AssumptionReport assumption_report(const RunLog& log, const LossOracle& oracle,
                                   const DiagnosticsConfig& cfg) {
  AssumptionReport report;
  report.n_probes = cfg.n_probes;
  const auto rows = log.phase2();
  const long stride = std::max(1L, cfg.stride);
  const long heavy = std::max(1L, cfg.expensive_stride);
  bool any_sharpening = false;
  EigSolverConfig min_cfg = cfg.eig;
  min_cfg.deflation = false;
  min_cfg.tol = std::max(min_cfg.tol, 1e-6);
  min_cfg.max_iters = std::min(min_cfg.max_iters, 500);

  for (const TrajectoryRecord* r : rows) {
    if (r->t % stride != 0) continue;
    const TaylorQuantities& tq = r->tq;
    AssumptionRow row;
    row.t = r->t;
    row.alpha = tq.alpha;
    row.eps = tq.eps;
    row.norm_grad_S_perp = std::sqrt(std::max(tq.beta, 0.0));
    const double denom = norm(tq.grad) * row.norm_grad_S_perp;
    row.cosine = denom > 0.0 ? std::clamp(tq.alpha / denom, -1.0, 1.0) : 0.0;
    row.lambda2_eta = cfg.eta * r->spectral.lambda2;
    if (tq.alpha > 0.0) any_sharpening = true;

    const double lam_max = tq.sharpness;
    double hess_norm = std::abs(lam_max);
    row.rho3 = row.rho4 = row.ratio_third = row.ratio_minres = kNaN;
    if (r->t % heavy == 0) try {
      const RhoEstimate rho = estimate_rho3_rho4(oracle, r->theta_dagger, cfg.n_probes, cfg.radius,
                                                 cfg.seed + static_cast<std::uint64_t>(r->t));
      row.rho3 = rho.rho3;
      row.rho4 = rho.rho4;
      std::mt19937_64 rng(cfg.seed ^ static_cast<std::uint64_t>(r->t + 1));
      const ParameterVector v = normalized(project_out(random_unit(rng, oracle.dim()), tq.u));
      const ParameterVector w = normalized(project_out(random_unit(rng, oracle.dim()), tq.u));
      const double tvw = norm(oracle.third_contract(r->theta_dagger, v, w));
      row.ratio_third = rho.rho3 > 0.0 ? tvw / rho.rho3 : 0.0;
      const double lam_min = min_eigenvalue(oracle, r->theta_dagger, min_cfg);
      hess_norm = std::max(hess_norm, std::abs(lam_min));
      row.ratio_minres = hess_norm > 0.0 ? std::abs(lam_min) / hess_norm : 0.0;
    } catch (const Error&) {
      // left as NaN; the report is advisory
    }
    row.ratio_hess = kNaN;
    if (!r->v_star.empty()) {
      const ParameterVector vp = project_out(r->v_star, tq.u);
      const double n2 = dot(vp, vp);
      const double q = std::abs(dot(vp, oracle.hvp(r->theta_dagger, vp)));
      row.ratio_hess = (n2 > 0.0 && hess_norm > 0.0) ? q / (hess_norm * n2) : 0.0;
    }
    report.rows.push_back(row);
  }
  report.no_progressive_sharpening = !any_sharpening;
  return report;
}

void write_assumptions_csv(std::ostream& out, const AssumptionReport& report) {
  out << "# t,alpha,eps,cosine,normS,rho3_hat,rho4_hat,ratio_third,ratio_hess,ratio_minres,"
         "lambda2_eta (rho hats are sampled lower bounds over "
      << report.n_probes << " probes)\n";
  out << "t,alpha,eps,cosine,normS,rho3_hat,rho4_hat,ratio_third,ratio_hess,ratio_minres,lambda2_eta\n";
  for (const auto& r : report.rows) {
    out << r.t << ',' << r.alpha << ',' << r.eps << ',' << r.cosine << ',' << r.norm_grad_S_perp
        << ',' << r.rho3 << ',' << r.rho4 << ',' << r.ratio_third << ',' << r.ratio_hess << ','
        << r.ratio_minres << ',' << r.lambda2_eta << '\n';
  }
}

CouplingSummary coupling_summary(const RunLog& log, double eta) {
  CouplingSummary s;
  s.breakdown_step = log.predicted_breakdown_step;
  s.min_abs_x_star = std::numeric_limits<double>::infinity();
  long counted = 0;
  for (const TrajectoryRecord* r : log.phase2()) {
    ++s.steps;
    const double delta = r->tq.delta;
    if (r->dev_flow > 10.0 * r->dev_norm && !s.flow_overtake_step) s.flow_overtake_step = r->t;
    if (std::isfinite(r->gen_pred_sharp)) {
      s.max_gen_sharp_err = std::max(s.max_gen_sharp_err, std::abs(r->sharpness - r->gen_pred_sharp) * eta);
    }
    if (!(delta > 0.0) || !std::isfinite(r->pred_loss)) continue;
    const double le = std::abs(r->loss - r->pred_loss) * eta / (delta * delta);
    const double se = std::abs(r->sharpness - r->pred_sharp) * eta;
    const double de = r->dev_pred / delta;
    s.max_loss_err = std::max(s.max_loss_err, le);
    s.max_sharp_err = std::max(s.max_sharp_err, se);
    s.max_dev_err = std::max(s.max_dev_err, de);
    s.mean_loss_err += le;
    s.mean_sharp_err += se;
    s.mean_dev_err += de;
    s.min_abs_x_star = std::min(s.min_abs_x_star, std::abs(r->x_star) / delta);
    s.max_dev_norm = std::max(s.max_dev_norm, r->dev_norm / delta);
    ++counted;
  }
  if (counted > 0) {
    s.mean_loss_err /= static_cast<double>(counted);
    s.mean_sharp_err /= static_cast<double>(counted);
    s.mean_dev_err /= static_cast<double>(counted);
  } else {
    s.min_abs_x_star = kNaN;
  }
  return s;
}

std::vector<double> two_step_average(const std::vector<double>& series) {
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    out[i] = i == 0 ? series[0] : 0.5 * (series[i] + series[i - 1]);
  }
  return out;
}

}  // namespace eos
