#include "eos/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "eos/error.hpp"

namespace eos {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("'" + key + "': expected a number, got '" + raw + "'");
  }
  return v;
}

long to_long(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("'" + key + "': expected an integer, got '" + raw + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("'" + key + "': expected a boolean, got '" + raw + "'");
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> to_doubles(const std::string& key, const std::string& raw) {
  std::vector<double> out;
  for (const auto& s : split_list(raw)) out.push_back(to_double(key, s));
  return out;
}

// Section reader that remembers which keys were consumed.
class Section {
 public:
  Section(std::string name, const pt::ptree* tree) : name_(std::move(name)), tree_(tree) {}
  bool present() const { return tree_ != nullptr; }

  template <class F>
  void read(const std::string& key, F&& apply) {
    used_.insert(key);
    if (!tree_) return;
    if (auto v = tree_->get_optional<std::string>(pt::ptree::path_type(key, '\0'))) {
      const std::string full = name_ + "." + key;
      apply(full, *v);
    }
  }

  void finish() const {
    if (!tree_) return;
    for (const auto& [k, _] : *tree_) {
      if (!used_.count(k)) throw ConfigError("unknown key '" + k + "' in [" + name_ + "]");
    }
  }

 private:
  std::string name_;
  const pt::ptree* tree_;
  std::set<std::string> used_;
};

Activation parse_activation(const std::string& key, const std::string& s) {
  if (trim(s) == "swish") return Activation::swish;
  if (trim(s) == "tanh") return Activation::tanh;
  throw ConfigError("'" + key + "': unknown activation '" + s + "'");
}

MlpLossKind parse_mlp_loss(const std::string& key, const std::string& s) {
  if (trim(s) == "mse") return MlpLossKind::mse;
  if (trim(s) == "logistic") return MlpLossKind::logistic;
  throw ConfigError("'" + key + "': unknown MLP loss '" + s + "'");
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!has_loss && !ode.enabled) throw ConfigError("config requests neither a run nor an ODE sweep");
  if (has_loss) run.validate();
  if (ode.enabled) {
    if (!(ode.alpha > 0.0) || !(ode.beta > 0.0)) throw ConfigError("[ode] alpha and beta must be > 0");
    if (!(ode.h > 0.0)) throw ConfigError("[ode] h must be > 0");
    if (ode.x0_fracs.empty()) throw ConfigError("[ode] x0 grid is empty");
    for (double f : ode.x0_fracs) {
      if (!(f > 0.0 && f < 1.0)) throw ConfigError("[ode] x0 fractions must lie in (0, 1)");
    }
  }
  if (diagnostics.n_probes < 1) throw ConfigError("[diagnostics] probes must be >= 1");
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }

  static const std::set<std::string> known{"experiment", "loss", "data", "init", "run",
                                           "eigen", "diagnostics", "ode"};
  std::map<std::string, const pt::ptree*> sections;
  for (const auto& [name, sub] : tree) {
    if (!known.count(name)) throw ConfigError("unknown section [" + name + "]");
    if (sub.empty() && !sub.data().empty()) throw ConfigError("key '" + name + "' outside any section");
    sections[name] = &sub;
  }
  auto section = [&](const std::string& name) {
    auto it = sections.find(name);
    return Section(name, it == sections.end() ? nullptr : it->second);
  };

  ExperimentConfig cfg;
  cfg.source_text = text;

  Section exp = section("experiment");
  exp.read("name", [&](const auto&, const auto& v) { cfg.name = trim(v); });
  exp.read("seed", [&](const auto& k, const auto& v) {
    const long s = to_long(k, v);
    if (s < 0) throw ConfigError("'" + k + "' must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(s);
  });
  bool output_set = false;
  exp.read("output", [&](const auto&, const auto& v) {
    cfg.output_dir = (base_dir / trim(v)).lexically_normal();
    output_set = true;
  });
  exp.finish();
  if (!output_set) cfg.output_dir = (base_dir / "out" / cfg.name).lexically_normal();

  Section loss = section("loss");
  cfg.has_loss = loss.present();
  LossSpec& ls = cfg.loss;
  loss.read("family", [&](const auto&, const auto& v) { ls.family = parse_loss_family(trim(v)); });
  loss.read("alpha", [&](const auto& k, const auto& v) { ls.toy.alpha = to_double(k, v); });
  loss.read("beta", [&](const auto& k, const auto& v) { ls.toy.beta = to_double(k, v); });
  loss.read("rho4", [&](const auto& k, const auto& v) { ls.rho4 = to_double(k, v); });
  loss.read("superquadratic", [&](const auto& k, const auto& v) { ls.superquadratic = to_bool(k, v); });
  loss.read("spectrum", [&](const auto& k, const auto& v) { ls.spectrum = to_doubles(k, v); });
  loss.read("matrix", [&](const auto& k, const auto& v) { ls.matrix = to_doubles(k, v); });
  loss.read("widths", [&](const auto& k, const auto& v) {
    ls.mlp.widths.clear();
    for (const auto& w : split_list(v)) {
      const long n = to_long(k, w);
      if (n < 1) throw ConfigError("'" + k + "': widths must be positive");
      ls.mlp.widths.push_back(static_cast<std::size_t>(n));
    }
  });
  loss.read("activation", [&](const auto& k, const auto& v) { ls.mlp.activation = parse_activation(k, v); });
  loss.read("objective", [&](const auto& k, const auto& v) { ls.mlp.loss = parse_mlp_loss(k, v); });
  loss.finish();

  Section data = section("data");
  data.read("source", [&](const auto& k, const auto& v) {
    const std::string s = trim(v);
    if (s == "synthetic") {
      ls.mlp.data.source = DatasetSpec::Source::synthetic;
    } else if (s == "csv") {
      ls.mlp.data.source = DatasetSpec::Source::csv;
    } else {
      throw ConfigError("'" + k + "': expected synthetic or csv");
    }
  });
  data.read("path", [&](const auto&, const auto& v) { ls.mlp.data.csv_path = (base_dir / trim(v)).lexically_normal(); });
  data.read("n", [&](const auto& k, const auto& v) {
    const long n = to_long(k, v);
    if (n < 1) throw ConfigError("'" + k + "' must be positive");
    ls.mlp.data.n = static_cast<std::size_t>(n);
  });
  data.read("input_std", [&](const auto& k, const auto& v) { ls.mlp.data.input_std = to_double(k, v); });
  data.finish();

  Section init = section("init");
  init.read("theta", [&](const auto& k, const auto& v) { cfg.init_theta = to_doubles(k, v); });
  init.read("x", [&](const auto& k, const auto& v) { cfg.init_x_frac = to_double(k, v); });
  init.finish();

  RunConfig& rc = cfg.run;
  Section run = section("run");
  run.read("eta", [&](const auto& k, const auto& v) { rc.eta = to_double(k, v); });
  run.read("max_steps", [&](const auto& k, const auto& v) { rc.max_steps = to_long(k, v); });
  run.read("max_phase1_steps", [&](const auto& k, const auto& v) { rc.max_phase1_steps = to_long(k, v); });
  run.read("stop_lambda2_frac", [&](const auto& k, const auto& v) { rc.stop_lambda2_frac = to_double(k, v); });
  run.read("projection_substeps", [&](const auto& k, const auto& v) { rc.projection_substeps = static_cast<int>(to_long(k, v)); });
  run.read("flow_substeps", [&](const auto& k, const auto& v) { rc.flow_substeps = static_cast<int>(to_long(k, v)); });
  run.read("margin", [&](const auto& k, const auto& v) { rc.margin = to_double(k, v); });
  run.read("closed_form_stride", [&](const auto& k, const auto& v) { rc.closed_form_stride = to_long(k, v); });
  run.read("profile_samples", [&](const auto& k, const auto& v) {
    const long n = to_long(k, v);
    if (n < 0) throw ConfigError("'" + k + "' must be nonnegative");
    rc.profile_samples = static_cast<std::size_t>(n);
  });
  run.read("trajectories", [&](const auto& k, const auto& v) {
    rc.run_flow = rc.run_predicted = rc.run_generalized = false;
    for (const auto& name : split_list(v)) {
      if (name == "gd" || name == "constrained") continue;  // always co-run
      if (name == "flow") {
        rc.run_flow = true;
      } else if (name == "predicted") {
        rc.run_predicted = true;
      } else if (name == "generalized") {
        rc.run_generalized = true;
      } else {
        throw ConfigError("'" + k + "': unknown trajectory '" + name + "'");
      }
    }
  });
  run.finish();
  ls.toy.eta = rc.eta;

  Section eig = section("eigen");
  eig.read("tol", [&](const auto& k, const auto& v) { rc.eig.tol = to_double(k, v); });
  eig.read("max_iters", [&](const auto& k, const auto& v) { rc.eig.max_iters = static_cast<int>(to_long(k, v)); });
  eig.read("second_tol", [&](const auto& k, const auto& v) { rc.eig.second_tol = to_double(k, v); });
  eig.read("ritz_window", [&](const auto& k, const auto& v) { rc.eig.ritz_window = static_cast<int>(to_long(k, v)); });
  eig.finish();

  DiagnosticsConfig& dc = cfg.diagnostics;
  Section diag = section("diagnostics");
  diag.read("stride", [&](const auto& k, const auto& v) { dc.stride = to_long(k, v); });
  diag.read("expensive_stride", [&](const auto& k, const auto& v) { dc.expensive_stride = to_long(k, v); });
  diag.read("probes", [&](const auto& k, const auto& v) { dc.n_probes = static_cast<int>(to_long(k, v)); });
  diag.read("radius", [&](const auto& k, const auto& v) { dc.radius = to_double(k, v); });
  diag.finish();
  dc.eta = rc.eta;
  dc.eig = rc.eig;

  Section ode = section("ode");
  cfg.ode.enabled = ode.present();
  ode.read("alpha", [&](const auto& k, const auto& v) { cfg.ode.alpha = to_double(k, v); });
  ode.read("beta", [&](const auto& k, const auto& v) { cfg.ode.beta = to_double(k, v); });
  ode.read("x0", [&](const auto& k, const auto& v) { cfg.ode.x0_fracs = to_doubles(k, v); });
  ode.read("h", [&](const auto& k, const auto& v) { cfg.ode.h = to_double(k, v); });
  ode.read("t_end", [&](const auto& k, const auto& v) { cfg.ode.t_end = to_double(k, v); });
  ode.read("stride", [&](const auto& k, const auto& v) {
    const long s = to_long(k, v);
    if (s < 1) throw ConfigError("'" + k + "' must be >= 1");
    cfg.ode.stride = static_cast<std::size_t>(s);
  });
  ode.finish();

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path().empty() ? "." : path.parent_path());
}

}  // namespace eos
