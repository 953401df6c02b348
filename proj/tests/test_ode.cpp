#include <doctest.h>

#include <cmath>
#include <sstream>

#include "eos/error.hpp"
#include "eos/ode.hpp"

using namespace eos;

namespace {
double delta_of(double a, double b) { return std::sqrt(2 * a / b); }
}  // namespace

TEST_CASE("ode right-hand side examples") {
  const auto fp = ode_rhs({std::sqrt(2.0), 0.0}, 1.0, 1.0);
  CHECK(std::abs(fp.first) == 0.0);
  CHECK(std::abs(fp.second) < 1e-15);
  const double d = delta_of(2.0, 3.0);
  const auto up = ode_rhs({d, 1.0}, 2.0, 3.0);
  CHECK(up.first == doctest::Approx(d));
  CHECK(std::abs(up.second) < 1e-14);
  const auto r = ode_rhs({2.0, 0.0}, 1.0, 1.0);
  CHECK(r.first == 0.0);
  CHECK(r.second == -1.0);
}

TEST_CASE("potential examples") {
  CHECK(potential({std::sqrt(2.0), 0.0}, 1.0, 1.0) == doctest::Approx(0.0));
  CHECK(potential({std::sqrt(2.0), 1.0}, 1.0, 1.0) == doctest::Approx(1.0));
  // h(z) = z − log z − 1 at z = 1/4
  CHECK(potential({std::sqrt(0.5), 0.0}, 1.0, 1.0) == doctest::Approx(0.25 - std::log(0.25) - 1));
  CHECK_THROWS_AS(potential({0.0, 0.0}, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(potential({-1.0, 0.0}, 1.0, 1.0), DomainError);
}

TEST_CASE("fixed point is stationary") {
  for (double a : {0.5, 1.0, 4.0})
    for (double b : {0.5, 1.0, 4.0}) {
      const double d = delta_of(a, b);
      const auto traj = integrate({d, 0.0}, a, b, 100.0);
      double worst = 0.0;
      for (const auto& s : traj) worst = std::max({worst, std::abs(s.X - d), std::abs(s.Y)});
      CHECK(worst < 1e-12);
    }
}

TEST_CASE("sampling covers the requested horizon") {
  const auto traj = integrate({0.5, 0.0}, 1.0, 1.0, 1.0005, 1e-3);
  CHECK(traj.size() == 1002);
  CHECK_THROWS_AS(integrate({0.5, 0.0}, 1.0, 1.0, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(integrate({0.5, 0.0}, 1.0, 1.0, 0.0, 1e-3), DomainError);
}

TEST_CASE("potential is conserved along orbits") {
  for (double a : {0.5, 1.0, 4.0})
    for (double b : {0.5, 1.0, 4.0})
      for (double frac : {1e-3, 0.1, 0.9}) {
        const double d = delta_of(a, b);
        const OdeState s0{frac * d, 0.0};
        const double t_end = 20.0;
        const auto traj = integrate(s0, a, b, t_end);
        const double g0 = potential(s0, a, b);
        double drift = 0.0;
        for (const auto& s : traj) drift = std::max(drift, std::abs(potential(s, a, b) - g0));
        CAPTURE(a);
        CAPTURE(b);
        CAPTURE(frac);
        CHECK(drift / t_end < 1e-8 * std::max(1.0, g0));
      }
}

TEST_CASE("orbit closes on itself") {
  const double h = 1e-3;
  const auto traj = integrate({0.1, 0.0}, 1.0, 1.0, 60.0, h);
  const auto ret = find_return(traj, 1.0, 1.0, h);
  REQUIRE(ret.has_value());
  CHECK(ret->period > 0.0);
  CHECK(std::abs(ret->state.X - 0.1) / 0.1 < 1e-6);
  CHECK(std::abs(ret->state.Y) < 1e-6);

  // A horizon shorter than one period never returns.
  const auto part = integrate({0.1, 0.0}, 1.0, 1.0, 0.5 * ret->period, h);
  CHECK_FALSE(find_return(part, 1.0, 1.0, h).has_value());
}

TEST_CASE("orbit extent matches integration and bounds") {
  for (double frac : {1e-3, 1e-2, 0.1, 0.5}) {
    const double a = 1.0, b = 1.0, d = delta_of(a, b);
    const OdeState s0{frac * d, 0.0};
    const auto traj = integrate(s0, a, b, 80.0);
    double max_x = 0, max_y = 0;
    for (const auto& s : traj) {
      CHECK(s.X > 0);
      max_x = std::max(max_x, s.X);
      max_y = std::max(max_y, std::abs(s.Y));
    }
    const auto [ex, ey] = orbit_extent(s0, a, b);
    CHECK(max_x == doctest::Approx(ex).epsilon(1e-4));
    CHECK(max_y == doctest::Approx(ey).epsilon(1e-4));
    const auto [bx, by] = excursion_bounds(s0, a, b);
    CHECK(bx == doctest::Approx(2 * d * std::sqrt(std::log(1 / frac))));
    CHECK(by == doctest::Approx(2 * std::sqrt(a * std::log(1 / frac))));
    CHECK(max_x <= bx);
    CHECK(max_y <= by);
  }
}

TEST_CASE("smaller starts give larger orbits") {
  double prev_x = INFINITY, prev_y = INFINITY;
  for (double frac : {1e-3, 1e-2, 0.1, 0.5, 0.9}) {
    const auto [ex, ey] = orbit_extent({frac * std::sqrt(2.0), 0.0}, 1.0, 1.0);
    CHECK(ex < prev_x);
    CHECK(ey < prev_y);
    prev_x = ex;
    prev_y = ey;
  }
}

TEST_CASE("bounds shrink towards the fixed point") {
  const double d = std::sqrt(2.0);
  const auto [bx, by] = excursion_bounds({d * (1 - 1e-9), 0.0}, 1.0, 1.0);
  CHECK(bx < 1e-3);
  CHECK(by < 1e-3);
  CHECK_THROWS_AS(excursion_bounds({d, 0.0}, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(excursion_bounds({2 * d, 0.0}, 1.0, 1.0), DomainError);
}

TEST_CASE("positivity is enforced") {
  // Coarse steps from far out overshoot through X = 0.
  CHECK_THROWS_AS(integrate({1e-6, 0.0}, 4.0, 0.5, 50.0, 2.0), StepTooLarge);
  CHECK_NOTHROW(integrate({1e-3 * 4.0, 0.0}, 4.0, 0.5, 20.0, 1e-2));
}

TEST_CASE("phase portrait rows") {
  const auto traj = integrate({0.5, 0.0}, 1.0, 1.0, 0.01, 1e-3);
  std::ostringstream os;
  write_phase_portrait(os, 3, 0.5, traj, 1.0, 1.0, 1e-3, 5);
  std::istringstream is(os.str());
  std::string line;
  int n = 0;
  while (std::getline(is, line)) {
    CHECK(line.rfind("3,0.5,", 0) == 0);
    ++n;
  }
  CHECK(n == 3);
}
