#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "eos/error.hpp"
#include "eos/experiment.hpp"

using namespace eos;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("eos_lab_test_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string toy_cfg(const fs::path& out, long steps = 40) {
  return "[experiment]\nname = t\nseed = 5\noutput = " + out.string() +
         "\n[loss]\nfamily = toy\n[run]\neta = 0.02\nmax_steps = " + std::to_string(steps) +
         "\n[diagnostics]\nexpensive_stride = 20\nprobes = 4\n";
}

int shell(const std::string& cmd) {
  const int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  return out;
}

TrajectoryRecord rec(long t, double x, double y, double delta) {
  TrajectoryRecord r;
  r.t = t;
  r.x = x;
  r.y = y;
  r.tq.delta = delta;
  return r;
}

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse_config(
      "; comment\n[experiment]\nname = demo\nseed = 42\n"
      "[loss]\nfamily = quartic_toy\nalpha = 2\nbeta = 0.5\nrho4 = 0.75\n"
      "[run]\neta = 0.05\nmax_steps = 10\ntrajectories = gd, constrained\n"
      "[eigen]\ntol = 1e-10\n[diagnostics]\nprobes = 3\n",
      "/base");
  CHECK(c.name == "demo");
  CHECK(c.seed == 42);
  CHECK(c.has_loss);
  CHECK(c.loss.family == LossFamily::quartic_toy);
  CHECK(c.loss.toy.alpha == 2.0);
  CHECK(c.loss.rho4 == 0.75);
  CHECK(c.run.eta == 0.05);
  CHECK(c.run.max_steps == 10);
  CHECK_FALSE(c.run.run_flow);
  CHECK_FALSE(c.run.run_predicted);
  CHECK(c.run.eig.tol == 1e-10);
  CHECK(c.diagnostics.n_probes == 3);
  CHECK(c.output_dir.lexically_normal() == fs::path("/base/out/demo"));

  const ExperimentConfig o = parse_config("[ode]\nalpha = 1\nx0 = 0.1, 0.5\n");
  CHECK_FALSE(o.has_loss);
  CHECK(o.ode.enabled);
  CHECK(o.ode.x0_fracs == std::vector<double>{0.1, 0.5});
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("[loss]\nfamily = toy\n[bogus]\na = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[loss]\nfamily = toy\ncolour = red\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[loss]\nfamily = cubic\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[loss]\nfamily = toy\n[run]\neta = fast\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[loss]\nfamily = toy\n[run]\neta = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[experiment]\nname = x\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[ode]\nx0 = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[loss]\nfamily = toy\n[run]\ntrajectories = gd, teleport\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[loss\nfamily = toy\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/x.cfg"), ConfigError);
}

TEST_CASE("bundled configs parse") {
  for (const char* name : {"toy.cfg", "mlp.cfg", "ode.cfg", "quartic.cfg", "quadratic.cfg"}) {
    CAPTURE(name);
    CHECK_NOTHROW(load_config(fs::path(EOS_SOURCE_DIR) / "configs" / name));
  }
}

TEST_CASE("content hash matches git blob ids") {
  CHECK(config_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(config_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("seed derivation and override") {
  const SeedPlan a = derive_seeds(17);
  std::mt19937_64 oracle(17);
  CHECK(a.master == 17);
  CHECK(a.data == oracle());
  CHECK(a.init == oracle());
  CHECK(a.solver == oracle());
  CHECK(a.diagnostics == oracle());
  CHECK(derive_seeds(18).data != a.data);

  ExperimentConfig c;
  c.seed = 9;
  ::unsetenv("EOS_LAB_SEED");
  CHECK(effective_seed(c) == 9);
  ::setenv("EOS_LAB_SEED", "123", 1);
  CHECK(effective_seed(c) == 123);
  ::setenv("EOS_LAB_SEED", "12x", 1);
  CHECK_THROWS_AS(effective_seed(c), ConfigError);
  ::unsetenv("EOS_LAB_SEED");
}

TEST_CASE("phase labels follow the stage rules") {
  RunLog log;
  const double xs[] = {0.1, -0.2, 0.6, -1.2, 1.3, -0.8, 0.3, -0.3};
  const double ys[] = {-0.5, 0.0, 0.3, 0.2, -0.1, -0.3, -0.2, -0.2};
  for (int i = 0; i < 8; ++i) log.records.push_back(rec(i, xs[i], ys[i], 1.0));
  CHECK(label_phases(log) == std::vector<int>{1, 1, 2, 2, 3, 4, 1, 1});

  RunLog fixed;
  for (int i = 0; i < 6; ++i) fixed.records.push_back(rec(i, i % 2 ? -1.0 : 1.0, 0.0, 1.0));
  CHECK(label_phases(fixed) == std::vector<int>(6, 1));

  RunLog unknown;
  for (int i = 0; i < 3; ++i) unknown.records.push_back(rec(i, NAN, NAN, NAN));
  CHECK(label_phases(unknown) == std::vector<int>(3, 1));
  CHECK(label_phases(RunLog{}).empty());
}

TEST_CASE("toy run cycles through all four stages") {
  ExperimentConfig c = parse_config(toy_cfg("/tmp/unused", 600));
  const ExperimentResult r = run_experiment_config(c);
  REQUIRE_FALSE(r.log.error.has_value());
  const auto& p = r.phases;
  std::vector<int> runs{p.front()};
  for (int tag : p)
    if (tag != runs.back()) runs.push_back(tag);
  REQUIRE(runs.size() >= 5);
  for (std::size_t i = 1; i < runs.size(); ++i) CHECK(runs[i] == runs[i - 1] % 4 + 1);
}

TEST_CASE("quadratic stable run is all stage 1") {
  const ExperimentConfig c = parse_config(
      "[loss]\nfamily = quadratic\nspectrum = 150, 1\n[run]\neta = 0.01\nmax_steps = 30\nmax_phase1_steps = 30\n");
  const ExperimentResult r = run_experiment_config(c);
  CHECK_FALSE(r.log.reached_instability);
  CHECK(r.log.stop_reason == "stable");
  CHECK(r.phases == std::vector<int>(r.log.records.size(), 1));
}

TEST_CASE("run writes deterministic outputs") {
  const fs::path dir = scratch("run");
  write(dir / "a.cfg", toy_cfg(dir / "out"));
  std::ostringstream msg;
  REQUIRE(run_config_file(dir / "a.cfg", msg) == kExitOk);
  const std::string first = slurp(dir / "out" / "run.csv");
  CHECK(fs::exists(dir / "out" / "assumptions.csv"));
  CHECK(fs::exists(dir / "out" / "summary.json"));
  REQUIRE(run_config_file(dir / "a.cfg", msg) == kExitOk);
  CHECK(slurp(dir / "out" / "run.csv") == first);

  std::istringstream is(first);
  std::string schema, header, row;
  std::getline(is, schema);
  std::getline(is, header);
  CHECK(schema.rfind("# ", 0) == 0);
  CHECK(schema.find("seed=5") != std::string::npos);
  CHECK(schema.find(config_hash(slurp(dir / "a.cfg"))) != std::string::npos);
  const auto cols = split(header);
  CHECK(cols.size() == 20);
  CHECK(cols.front() == "t");
  CHECK(cols.back() == "phase");
  long rows = 0;
  while (std::getline(is, row)) {
    CHECK(split(row).size() == cols.size());
    ++rows;
  }
  CHECK(rows > 40);

  const std::string summary = slurp(dir / "out" / "summary.json");
  CHECK(summary.find("\"seed\"") != std::string::npos);
  CHECK(summary.find(config_hash(slurp(dir / "a.cfg"))) != std::string::npos);

  ::setenv("EOS_LAB_SEED", "77", 1);
  REQUIRE(run_config_file(dir / "a.cfg", msg) == kExitOk);
  ::unsetenv("EOS_LAB_SEED");
  CHECK(slurp(dir / "out" / "run.csv").find("seed=77") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("ode config writes orbits") {
  const fs::path dir = scratch("ode");
  write(dir / "o.cfg", "[experiment]\noutput = " + (dir / "out").string() + "\n[ode]\nx0 = 0.1, 0.5\nstride = 100\n");
  std::ostringstream msg;
  REQUIRE(run_config_file(dir / "o.cfg", msg) == kExitOk);
  const std::string ode = slurp(dir / "out" / "ode.csv");
  CHECK(ode.rfind("#", 0) == 0);
  CHECK(ode.find("orbit,x0,t,X,Y,g") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out" / "run.csv"));
  fs::remove_all(dir);
}

TEST_CASE("command-line exit codes") {
  const std::string bin = EOS_LAB_BIN;
  const fs::path dir = scratch("cli");
  write(dir / "good.cfg", toy_cfg(dir / "good"));
  write(dir / "bad.cfg", "[loss]\nfamily = nope\n");
  write(dir / "abort.cfg", toy_cfg(dir / "abort") + "[eigen]\nmax_iters = 1\n");

  CHECK(shell(bin + " run " + (dir / "good.cfg").string()) == 0);
  CHECK(shell(bin + " run " + (dir / "bad.cfg").string()) == 2);
  CHECK(shell(bin + " run " + (dir / "missing.cfg").string()) == 2);
  CHECK(shell(bin + " run " + (dir / "abort.cfg").string()) == 3);
  CHECK(fs::exists(dir / "abort" / "summary.json"));
  CHECK(shell(bin + " frobnicate") == 2);
  CHECK(shell(bin + " sweep " + dir.string() + " --jobs 2") == 3);

  const fs::path ok = scratch("sweep");
  write(ok / "a.cfg", toy_cfg(ok / "a"));
  write(ok / "b.cfg", toy_cfg(ok / "b"));
  CHECK(shell(bin + " sweep " + ok.string() + " -j 2") == 0);
  CHECK(slurp(ok / "a" / "run.csv").substr(slurp(ok / "a" / "run.csv").find('\n')) ==
        slurp(ok / "b" / "run.csv").substr(slurp(ok / "b" / "run.csv").find('\n')));
  fs::remove_all(dir);
  fs::remove_all(ok);
}

TEST_CASE("sweep reports in name order") {
  const fs::path dir = scratch("order");
  write(dir / "b.cfg", toy_cfg(dir / "b", 5));
  write(dir / "a.cfg", toy_cfg(dir / "a", 5));
  write(dir / "notes.txt", "ignored");
  std::ostringstream msg;
  CHECK(sweep_directory(dir, 3, msg) == kExitOk);
  const std::string m = msg.str();
  CHECK(m.find("a.cfg") < m.find("b.cfg"));
  std::ostringstream m2;
  CHECK(sweep_directory(dir / "nope", 1, m2) == kExitConfig);
  fs::remove_all(dir);
}
