#include "eos/error.hpp"

namespace eos {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::non_finite: return "NonFinite";
    case ErrorKind::config: return "ConfigError";
    case ErrorKind::no_convergence: return "NoConvergence";
    case ErrorKind::degenerate_spectrum: return "DegenerateSpectrum";
    case ErrorKind::projection_diverged: return "ProjectionDiverged";
    case ErrorKind::profile_range_exceeded: return "ProfileRangeExceeded";
    case ErrorKind::step_too_large: return "StepTooLarge";
    case ErrorKind::domain: return "DomainError";
  }
  return "Unknown";
}

}  // namespace eos
