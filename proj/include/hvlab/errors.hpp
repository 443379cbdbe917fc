// Error taxonomy shared by every hvlab module.
//
// Two families cover everything the library can signal:
//
//   * ValidationError  -- the caller handed us something malformed: parameters
//     outside their admissible ranges, a state that violates a precondition,
//     or a request whose closed-form answer does not exist (e.g. asking for an
//     interior equilibrium when e/d <= a).  The CLI maps these to exit code 2.
//
//   * NumericalError   -- the inputs were well formed but a computation failed
//     at runtime: finite-time blow-up, a root solve that never converged, a
//     non-finite right-hand-side evaluation at an accepted state.  The CLI
//     maps these to exit code 3.

#pragma once

#include <stdexcept>
#include <string>

namespace hvlab {

/// Precondition / input-domain violation.  CLI exit code 2.
class ValidationError : public std::invalid_argument {
public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Runtime numerical failure (blow-up, non-convergence, ...).  CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hvlab
