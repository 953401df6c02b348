#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eos {

enum class ErrorKind {
  non_finite,
  config,
  no_convergence,
  degenerate_spectrum,
  projection_diverged,
  profile_range_exceeded,
  step_too_large,
  domain,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Base class for every failure the library reports. The kind lets callers
/// (the run loop, the CLI) decide whether to abort, annotate or retry.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define EOS_DEFINE_ERROR(Name, Kind)                                    \
  class Name : public Error {                                           \
   public:                                                              \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

EOS_DEFINE_ERROR(NonFinite, non_finite)
EOS_DEFINE_ERROR(ConfigError, config)
EOS_DEFINE_ERROR(NoConvergence, no_convergence)
EOS_DEFINE_ERROR(DegenerateSpectrum, degenerate_spectrum)
EOS_DEFINE_ERROR(ProjectionDiverged, projection_diverged)
EOS_DEFINE_ERROR(ProfileRangeExceeded, profile_range_exceeded)
EOS_DEFINE_ERROR(StepTooLarge, step_too_large)
EOS_DEFINE_ERROR(DomainError, domain)

#undef EOS_DEFINE_ERROR

}  // namespace eos
