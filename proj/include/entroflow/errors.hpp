#pragma once

#include <stdexcept>
#include <string>

namespace entroflow {

/// An iterative solver (root-find, Newton, CG, fixed point) hit its cap.
class SolverFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation was violated by the caller.
class PreconditionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A proven property of the scheme failed to hold; indicates a bug.
class InvariantViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Rejected run configuration.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The verification oracle itself failed; a test infrastructure fault.
class OracleError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace entroflow
