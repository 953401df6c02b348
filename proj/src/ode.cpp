#include "eos/ode.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "eos/error.hpp"

namespace eos {

namespace {

double h_fun(double z) { return z - std::log(z) - 1.0; }

void check_params(double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw DomainError("ODE needs alpha > 0 and beta > 0");
}

OdeState rk4(const OdeState& s, double alpha, double beta, double h) {
  const auto f = [&](double X, double Y) { return ode_rhs({X, Y}, alpha, beta); };
  const auto [a1, b1] = f(s.X, s.Y);
  const auto [a2, b2] = f(s.X + h / 2 * a1, s.Y + h / 2 * b1);
  const auto [a3, b3] = f(s.X + h / 2 * a2, s.Y + h / 2 * b2);
  const auto [a4, b4] = f(s.X + h * a3, s.Y + h * b3);
  return {s.X + h / 6 * (a1 + 2 * a2 + 2 * a3 + a4), s.Y + h / 6 * (b1 + 2 * b2 + 2 * b3 + b4)};
}

}  // namespace

std::pair<double, double> ode_rhs(const OdeState& s, double alpha, double beta) {
  return {s.X * s.Y, alpha - beta * s.X * s.X / 2.0};
}

std::vector<OdeState> integrate(const OdeState& state0, double alpha, double beta, double t_end,
                                double h) {
  check_params(alpha, beta);
  if (!(h > 0.0) || !(t_end > 0.0)) throw DomainError("integrate needs h > 0 and t_end > 0");
  if (!(state0.X > 0.0)) throw DomainError("integrate needs X(0) > 0");
  const auto n = static_cast<std::size_t>(std::ceil(t_end / h - 1e-9));
  std::vector<OdeState> out;
  out.reserve(n + 1);
  out.push_back(state0);
  for (std::size_t i = 0; i < n; ++i) {
    const double step = std::min(h, t_end - static_cast<double>(i) * h);
    const OdeState next = rk4(out.back(), alpha, beta, step);
    if (!(next.X > 0.0) || !std::isfinite(next.Y)) {
      throw StepTooLarge("X left (0, inf) at t = " + std::to_string((i + 1) * h) +
                         "; reduce the step size");
    }
    out.push_back(next);
  }
  return out;
}

double potential(const OdeState& s, double alpha, double beta) {
  check_params(alpha, beta);
  if (!(s.X > 0.0)) throw DomainError("potential needs X > 0");
  return h_fun(beta * s.X * s.X / (2.0 * alpha)) + s.Y * s.Y / alpha;
}

std::pair<double, double> excursion_bounds(const OdeState& state0, double alpha, double beta) {
  check_params(alpha, beta);
  const double delta = std::sqrt(2.0 * alpha / beta);
  if (!(state0.X > 0.0) || state0.X >= delta) throw DomainError("excursion bounds need 0 < X(0) < delta");
  const double l = std::log(delta / state0.X);
  constexpr double C = 2.0;
  return {C * delta * std::sqrt(l), C * std::sqrt(alpha * l)};
}

std::pair<double, double> orbit_extent(const OdeState& state0, double alpha, double beta) {
  const double g = potential(state0, alpha, beta);
  const double delta = std::sqrt(2.0 * alpha / beta);
  // h(z) = g on z > 1, by bisection then Newton polish
  double lo = 1.0, hi = 2.0;
  while (h_fun(hi) < g) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (h_fun(mid) < g ? lo : hi) = mid;
  }
  const double z = 0.5 * (lo + hi);
  return {delta * std::sqrt(z), std::sqrt(alpha * g)};
}

std::optional<OrbitReturn> find_return(const std::vector<OdeState>& traj, double alpha, double beta,
                                       double h) {
  const double delta = std::sqrt(2.0 * alpha / beta);
  bool left = false;
  for (std::size_t i = 1; i < traj.size(); ++i) {
    const OdeState& a = traj[i - 1];
    const OdeState& b = traj[i];
    if (!left) {
      if (b.Y < 0.0) left = true;  // orbit is past the far side
      continue;
    }
    if (a.Y < 0.0 && b.Y >= 0.0 && b.X < delta) {
      const double w = -a.Y / (b.Y - a.Y);
      OrbitReturn r;
      r.period = (static_cast<double>(i - 1) + w) * h;
      r.state = {a.X + w * (b.X - a.X), 0.0};
      return r;
    }
  }
  return std::nullopt;
}

void write_phase_portrait(std::ostream& out, int orbit, double x0, const std::vector<OdeState>& traj,
                          double alpha, double beta, double h, std::size_t stride) {
  if (stride == 0) stride = 1;
  for (std::size_t i = 0; i < traj.size(); i += stride) {
    out << orbit << ',' << x0 << ',' << static_cast<double>(i) * h << ',' << traj[i].X << ','
        << traj[i].Y << ',' << potential(traj[i], alpha, beta) << '\n';
  }
}

}  // namespace eos
