#pragma once

#include <stdexcept>
#include <string>

namespace radpair {

// Exit codes shared by the command-line front end.
enum class ExitCode : int {
  ok = 0,
  validation = 2,
  numerical = 3,
  io = 4,
  underdetermined = 5,
};

class Error : public std::runtime_error {
public:
  Error(ExitCode code, const std::string &what)
      : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

private:
  ExitCode code_;
};

struct ValidationError : Error {
  explicit ValidationError(const std::string &what)
      : Error(ExitCode::validation, what) {}
};

struct NumericalError : Error {
  explicit NumericalError(const std::string &what)
      : Error(ExitCode::numerical, what) {}
};

/// Tr rho fell below the floor where the nonlinear terms are defined.
struct TraceFloorError : NumericalError {
  using NumericalError::NumericalError;
};

/// The half-step error monitor rejected the time step.
struct StepTooLargeError : NumericalError {
  using NumericalError::NumericalError;
};

struct IoError : Error {
  explicit IoError(const std::string &what) : Error(ExitCode::io, what) {}
};

struct UnderdeterminedError : Error {
  explicit UnderdeterminedError(const std::string &what)
      : Error(ExitCode::underdetermined, what) {}
};

} // namespace radpair
