#pragma once

#include <stdexcept>
#include <string>

namespace eklab {

enum class ErrorKind {
  shape,
  dimension,
  unsupported_order,
  domain,
  vacuum,
  instability,
  hyperbolicity_loss,
  dependency,
  profile_existence,
  coercivity,
  enlarge_domain,
  decay,
  scale_separation,
  history_too_short,
  config,
  io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a machine-readable kind so the
/// harness can map it onto an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Numerical abort carrying the simulation time at which it happened.
class NumericalAbort : public Error {
 public:
  NumericalAbort(ErrorKind kind, const std::string& what, double time)
      : Error(kind, what + " (t = " + std::to_string(time) + ")"), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace eklab
