#include "eos/experiment.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "eos/error.hpp"
#include "eos/losses.hpp"
#include "eos/mlp.hpp"

namespace eos {

namespace {

// Shortest round-trip representation, so output is byte-stable.
std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

nlohmann::json jnum(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

template <class T>
nlohmann::json jopt(const std::optional<T>& v) {
  if (!v) return nullptr;
  return *v;
}

}  // namespace

SeedPlan derive_seeds(std::uint64_t master) {
  std::mt19937_64 rng(master);
  SeedPlan s;
  s.master = master;
  s.data = rng();
  s.init = rng();
  s.solver = rng();
  s.diagnostics = rng();
  return s;
}

std::uint64_t effective_seed(const ExperimentConfig& cfg) {
  const char* env = std::getenv("EOS_LAB_SEED");
  if (!env || !*env) return cfg.seed;
  std::uint64_t v = 0;
  const char* end = env + std::char_traits<char>::length(env);
  const auto [ptr, ec] = std::from_chars(env, end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(std::string("EOS_LAB_SEED is not an unsigned integer: '") + env + "'");
  }
  return v;
}

std::string config_hash(const std::string& text) {
  const std::string blob = "blob " + std::to_string(text.size()) + '\0' + text;
  unsigned char md[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), md);
  std::ostringstream hex;
  for (unsigned char c : md) hex << std::hex << std::setw(2) << std::setfill('0') << int(c);
  return hex.str();
}

std::vector<int> label_phases(const RunLog& log) {
  const auto& rec = log.records;
  const std::size_t n = rec.size();
  std::vector<int> tags(n, 1);
  auto trend = [&](std::size_t i, auto get) {
    if (n < 2) return 0.0;
    return i == 0 ? get(rec[1]) - get(rec[0]) : get(rec[i]) - get(rec[i - 1]);
  };
  const auto ax = [](const TrajectoryRecord& r) { return std::abs(r.x); };
  const auto y = [](const TrajectoryRecord& r) { return r.y; };
  int prev = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = rec[i];
    const double delta = r.tq.delta;
    int tag = 0;
    if (std::isfinite(r.x) && std::isfinite(r.y) && std::isfinite(delta)) {
      const double dy = trend(i, y);
      const double dx = trend(i, ax);
      if (std::abs(r.x) < delta / 2 && dy > 0) {
        tag = 1;
      } else if (r.y > 0 && dx > 0) {
        tag = 2;
      } else if (std::abs(r.x) > delta && dy < 0) {
        tag = 3;
      } else if (r.y < 0 && dx < 0) {
        tag = 4;
      }
    }
    tags[i] = tag == 0 ? prev : tag;
    prev = tags[i];
  }
  return tags;
}

std::vector<OdeOrbit> run_ode_sweep(const OdeSweepSpec& spec) {
  const double delta = std::sqrt(2.0 * spec.alpha / spec.beta);
  std::vector<OdeOrbit> out;
  for (double frac : spec.x0_fracs) {
    OdeOrbit orbit;
    orbit.x0_frac = frac;
    orbit.h = spec.h;
    const OdeState s0{frac * delta, 0.0};
    if (spec.t_end > 0.0) {
      orbit.states = integrate(s0, spec.alpha, spec.beta, spec.t_end, spec.h);
      if (auto r = find_return(orbit.states, spec.alpha, spec.beta, spec.h)) {
        orbit.closed = true;
        orbit.period = r->period;
      }
    } else {
      for (double t_end = 20.0; t_end <= 5120.0; t_end *= 2.0) {
        orbit.states = integrate(s0, spec.alpha, spec.beta, t_end, spec.h);
        if (auto r = find_return(orbit.states, spec.alpha, spec.beta, spec.h)) {
          orbit.closed = true;
          orbit.period = r->period;
          const auto keep = static_cast<std::size_t>(std::ceil(r->period / spec.h)) + 1;
          orbit.states.resize(std::min(keep, orbit.states.size()));
          break;
        }
      }
    }
    out.push_back(std::move(orbit));
  }
  return out;
}

HoverStats hover_stats(const RunLog& log, double eta, long window) {
  HoverStats h;
  const auto rows = log.phase2();
  if (rows.empty()) return h;
  const std::size_t w = std::min<std::size_t>(rows.size(), static_cast<std::size_t>(std::max(1L, window)));
  h.window = static_cast<long>(w);
  h.min_ratio = std::numeric_limits<double>::infinity();
  h.max_ratio = -std::numeric_limits<double>::infinity();
  for (std::size_t i = rows.size() - w; i < rows.size(); ++i) {
    const double r = rows[i]->sharpness * eta / 2.0;
    h.min_ratio = std::min(h.min_ratio, r);
    h.max_ratio = std::max(h.max_ratio, r);
    h.mean_ratio += r;
  }
  h.mean_ratio /= static_cast<double>(w);
  h.within_10pct = h.min_ratio >= 0.9 && h.max_ratio <= 1.1;
  return h;
}

ExperimentResult run_experiment_config(const ExperimentConfig& cfg_in) {
  ExperimentResult res;
  res.config = cfg_in;
  ExperimentConfig& cfg = res.config;
  res.seeds = derive_seeds(effective_seed(cfg));
  res.hash = config_hash(cfg.source_text);

  if (cfg.has_loss) {
    cfg.loss.toy.eta = cfg.run.eta;
    cfg.loss.mlp.data.seed = res.seeds.data;
    cfg.run.eig.seed = res.seeds.solver;
    cfg.diagnostics.eig = cfg.run.eig;
    cfg.diagnostics.seed = res.seeds.diagnostics;
    cfg.diagnostics.eta = cfg.run.eta;
    const OraclePtr oracle = make_builtin_loss(cfg.loss);

    ParameterVector theta0;
    if (!cfg.init_theta.empty()) {
      theta0 = ParameterVector(cfg.init_theta);
    } else if (const auto* toy = dynamic_cast<const ToyLoss*>(oracle.get())) {
      theta0 = ParameterVector{cfg.init_x_frac * toy->delta(), 0.0, 0.0};
    } else if (const auto* mlp = dynamic_cast<const MlpLoss*>(oracle.get())) {
      theta0 = mlp->initial_parameters(res.seeds.init);
    } else {
      theta0 = ParameterVector(oracle->dim(), 1.0);
    }
    if (theta0.size() != oracle->dim()) {
      throw ConfigError("[init] theta has " + std::to_string(theta0.size()) + " entries, loss needs " +
                        std::to_string(oracle->dim()));
    }

    res.ran_trajectory = true;
    res.log = run_experiment(*oracle, theta0, cfg.run);
    res.phases = label_phases(res.log);
    res.assumptions = assumption_report(res.log, *oracle, cfg.diagnostics);
    res.coupling = coupling_summary(res.log, cfg.run.eta);
    res.hover = hover_stats(res.log, cfg.run.eta);
  }
  if (cfg.ode.enabled) res.orbits = run_ode_sweep(cfg.ode);
  return res;
}

void write_run_csv(std::ostream& out, const ExperimentResult& res) {
  const RunLog& log = res.log;
  out << "# t,loss,loss_dagger,loss_flow,sharpness,sharpness_2avg,lambda2,x,y,x_star,y_star,"
         "pred_loss,pred_sharp,gen_pred_loss,gen_pred_sharp,dev_norm,dev_pred,delta_t,eps_t,phase"
      << " | seed=" << res.seeds.master << " config=" << res.hash << '\n';
  out << "t,loss,loss_dagger,loss_flow,sharpness,sharpness_2avg,lambda2,x,y,x_star,y_star,"
         "pred_loss,pred_sharp,gen_pred_loss,gen_pred_sharp,dev_norm,dev_pred,delta_t,eps_t,phase\n";
  std::vector<double> s;
  s.reserve(log.records.size());
  for (const auto& r : log.records) s.push_back(r.sharpness);
  const std::vector<double> s2 = two_step_average(s);
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    const auto& r = log.records[i];
    out << r.t << ',' << num(r.loss) << ',' << num(r.loss_dagger) << ',' << num(r.loss_flow) << ','
        << num(r.sharpness) << ',' << num(s2[i]) << ',' << num(r.spectral.lambda2) << ','
        << num(r.x) << ',' << num(r.y) << ',' << num(r.x_star) << ',' << num(r.y_star) << ','
        << num(r.pred_loss) << ',' << num(r.pred_sharp) << ',' << num(r.gen_pred_loss) << ','
        << num(r.gen_pred_sharp) << ',' << num(r.dev_norm) << ',' << num(r.dev_pred) << ','
        << num(r.tq.delta) << ',' << num(r.tq.eps) << ',' << res.phases[i] << '\n';
  }
}

void write_ode_csv(std::ostream& out, const ExperimentResult& res) {
  const auto& spec = res.config.ode;
  out << "# orbit,x0,t,X,Y,g | alpha=" << num(spec.alpha) << " beta=" << num(spec.beta) << '\n';
  out << "orbit,x0,t,X,Y,g\n";
  const double delta = std::sqrt(2.0 * spec.alpha / spec.beta);
  for (std::size_t k = 0; k < res.orbits.size(); ++k) {
    const auto& o = res.orbits[k];
    for (std::size_t i = 0; i < o.states.size(); i += spec.stride) {
      const auto& st = o.states[i];
      out << k << ',' << num(o.x0_frac * delta) << ',' << num(static_cast<double>(i) * o.h) << ','
          << num(st.X) << ',' << num(st.Y) << ',' << num(potential(st, spec.alpha, spec.beta)) << '\n';
    }
  }
}

void write_summary_json(std::ostream& out, const ExperimentResult& res) {
  using nlohmann::json;
  json j;
  j["name"] = res.config.name;
  j["seed"] = res.seeds.master;
  j["seeds"] = {{"data", res.seeds.data},
                {"init", res.seeds.init},
                {"solver", res.seeds.solver},
                {"diagnostics", res.seeds.diagnostics}};
  j["config_hash"] = res.hash;
  j["config"] = res.config.source_text;
  if (res.ran_trajectory) {
    const RunLog& log = res.log;
    const auto& c = res.coupling;
    j["loss"] = to_string(res.config.loss.family);
    j["eta"] = res.config.run.eta;
    j["reached_instability"] = log.reached_instability;
    j["stop_reason"] = log.stop_reason;
    j["phase2_steps"] = c.steps;
    j["phase1_steps"] = static_cast<long>(log.records.size()) - c.steps;
    if (log.error) {
      j["error"] = {{"kind", to_string(log.error->kind)},
                    {"message", log.error->message},
                    {"step", log.error->step}};
    } else {
      j["error"] = nullptr;
    }
    j["coupling"] = {{"max_loss_err", jnum(c.max_loss_err)},
                     {"mean_loss_err", jnum(c.mean_loss_err)},
                     {"max_sharp_err", jnum(c.max_sharp_err)},
                     {"mean_sharp_err", jnum(c.mean_sharp_err)},
                     {"max_dev_err", jnum(c.max_dev_err)},
                     {"mean_dev_err", jnum(c.mean_dev_err)},
                     {"min_abs_x_star_over_delta", jnum(c.min_abs_x_star)},
                     {"max_dev_norm_over_delta", jnum(c.max_dev_norm)},
                     {"max_gen_sharp_err", jnum(c.max_gen_sharp_err)},
                     {"flow_overtake_step", jopt(c.flow_overtake_step)},
                     {"breakdown_step", jopt(c.breakdown_step)},
                     {"generalized_breakdown_step", jopt(log.generalized_breakdown_step)}};
    j["dagger_descent_violations"] = log.dagger_descent_violations;
    long alpha_flags = 0;
    for (const auto* r : log.phase2()) alpha_flags += r->alpha_nonpositive ? 1 : 0;
    j["alpha_nonpositive_steps"] = alpha_flags;
    j["no_progressive_sharpening"] = res.assumptions.no_progressive_sharpening;
    j["edge_of_stability"] = {{"window", res.hover.window},
                              {"min_ratio", jnum(res.hover.min_ratio)},
                              {"max_ratio", jnum(res.hover.max_ratio)},
                              {"mean_ratio", jnum(res.hover.mean_ratio)},
                              {"within_10pct", res.hover.within_10pct}};
  }
  if (!res.orbits.empty()) {
    json orbits = json::array();
    for (const auto& o : res.orbits) {
      orbits.push_back({{"x0_over_delta", o.x0_frac}, {"closed", o.closed}, {"period", jnum(o.period)}});
    }
    j["ode"] = orbits;
  }
  out << j.dump(2) << '\n';
}

namespace {

void write_file(const std::filesystem::path& p, const std::function<void(std::ostream&)>& body) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + p.string());
  f << std::setprecision(17);
  body(f);
}

}  // namespace

int run_config_file(const std::filesystem::path& path, std::ostream& msg) {
  ExperimentConfig cfg;
  ExperimentResult res;
  try {
    cfg = load_config(path);
    std::filesystem::create_directories(cfg.output_dir);
    res = run_experiment_config(cfg);
  } catch (const ConfigError& e) {
    msg << path.string() << ": config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    msg << path.string() << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    msg << path.string() << ": " << to_string(e.kind()) << ": " << e.what() << '\n';
    return kExitAborted;
  }

  const auto& dir = cfg.output_dir;
  if (res.ran_trajectory) {
    write_file(dir / "run.csv", [&](std::ostream& o) { write_run_csv(o, res); });
    write_file(dir / "assumptions.csv", [&](std::ostream& o) { write_assumptions_csv(o, res.assumptions); });
  }
  if (!res.orbits.empty()) write_file(dir / "ode.csv", [&](std::ostream& o) { write_ode_csv(o, res); });
  write_file(dir / "summary.json", [&](std::ostream& o) { write_summary_json(o, res); });

  if (res.ran_trajectory && res.log.error) {
    msg << path.string() << ": aborted at step " << res.log.error->step << " ("
        << to_string(res.log.error->kind) << ": " << res.log.error->message
        << "); partial output in " << dir.string() << '\n';
    return kExitAborted;
  }
  msg << path.string() << ": ok -> " << dir.string();
  if (res.ran_trajectory) msg << " (" << res.log.records.size() << " rows, stop: " << res.log.stop_reason << ")";
  msg << '\n';
  return kExitOk;
}

int sweep_directory(const std::filesystem::path& dir, int jobs, std::ostream& msg) {
  if (!std::filesystem::is_directory(dir)) {
    msg << dir.string() << ": not a directory\n";
    return kExitConfig;
  }
  std::vector<std::filesystem::path> configs;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".cfg") configs.push_back(e.path());
  }
  std::sort(configs.begin(), configs.end());
  if (configs.empty()) {
    msg << dir.string() << ": no .cfg files\n";
    return kExitConfig;
  }
  std::vector<std::string> lines(configs.size());
  std::vector<int> codes(configs.size(), kExitOk);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < configs.size();) {
      std::ostringstream m;
      codes[i] = run_config_file(configs[i], m);
      lines[i] = m.str();
    }
  };
  const int n = std::clamp(jobs, 1, static_cast<int>(configs.size()));
  std::vector<std::thread> pool;
  for (int k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  int worst = kExitOk;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    msg << lines[i];
    worst = std::max(worst, codes[i]);
  }
  return worst;
}

}  // namespace eos
