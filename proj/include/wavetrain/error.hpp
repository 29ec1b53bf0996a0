#ifndef WAVETRAIN_ERROR_HPP
#define WAVETRAIN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace wavetrain {

/// Error categories. The numeric values double as the C API status codes and
/// as the CLI exit codes for the first five entries.
enum class ErrorCode : int {
  ok = 0,
  config = 1,
  no_physical_fixed_point = 2,
  integration = 3,
  diagnostics = 4,
  invalid_argument = 5,
  numerical = 6,
  io = 7,
  internal = 8,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Bad model definition, unknown preset, malformed config document.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCode::config, what) {}
};

/// The model has no equilibrium with N0 > 0 and P0 > 0 (or the requested
/// index is out of range); the message lists every root found.
class NoPhysicalFixedPoint : public Error {
 public:
  explicit NoPhysicalFixedPoint(const std::string& what)
      : Error(ErrorCode::no_physical_fixed_point, what) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorCode::invalid_argument, what) {}
};

/// Non-finite arithmetic or a numerical postcondition that failed.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorCode::numerical, what) {}
};

/// Step-size underflow in the adaptive integrator. Blow-up is not an error.
class IntegrationError : public Error {
 public:
  explicit IntegrationError(const std::string& what)
      : Error(ErrorCode::integration, what) {}
};

class DiagnosticsError : public Error {
 public:
  explicit DiagnosticsError(const std::string& what)
      : Error(ErrorCode::diagnostics, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::io, what) {}
};

}  // namespace wavetrain

#endif  // WAVETRAIN_ERROR_HPP
