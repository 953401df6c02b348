#pragma once

#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

namespace eos {

/// Envelope |x| and sharpness offset of the reduced two-dimensional system
/// X' = XY, Y' = α − βX²/2.
struct OdeState {
  double X = 0.0;
  double Y = 0.0;
};

std::pair<double, double> ode_rhs(const OdeState& s, double alpha, double beta);

/// Fixed-step RK4 from state0 to t_end; element i is the state at time i·h
/// (the last step is shortened to land on t_end). Throws StepTooLarge when X
/// leaves (0, ∞).
std::vector<OdeState> integrate(const OdeState& state0, double alpha, double beta, double t_end,
                                double h = 1e-3);

/// g = h(βX²/(2α)) + Y²/α with h(z) = z − log z − 1. Throws DomainError for X ≤ 0.
double potential(const OdeState& s, double alpha, double beta);

/// Excursion bounds (2δ√log(δ/X₀), 2√(α log(δ/X₀))) for a start (X₀, 0) with 0 < X₀ < δ.
std::pair<double, double> excursion_bounds(const OdeState& state0, double alpha, double beta);

/// Exact extent of the closed orbit through (X₀, 0): max X (the other root of
/// h(βX²/2α) = g) and max |Y| = √(α g).
std::pair<double, double> orbit_extent(const OdeState& state0, double alpha, double beta);

struct OrbitReturn {
  double period = 0.0;
  OdeState state;  // at the return crossing of Y = 0 (linearly interpolated)
};

/// First upward crossing of Y = 0 with X < δ after leaving the start, located
/// by linear interpolation between RK4 samples.
std::optional<OrbitReturn> find_return(const std::vector<OdeState>& trajectory, double alpha,
                                       double beta, double h);

/// Phase-portrait rows "orbit,x0,t,X,Y,g".
void write_phase_portrait(std::ostream& out, int orbit, double x0, const std::vector<OdeState>& traj,
                          double alpha, double beta, double h, std::size_t stride = 1);

}  // namespace eos
