// Equilibrium and local stability of the indirectly controlled 3-D system
// with the linear characteristic function phi(sigma) = sigma.
//
// A stationary point must satisfy simultaneously
//
//     1 - x - m y / (x^p + c) = 0        (prey nullcline, x > 0)
//     x + a - b xi = e/d                 (predator death balances reproduction)
//     sigma = b1 x + b2 y - b3 xi = 0    (control at rest)
//
// which a damped Newton iteration solves from five seeds clustered around the
// uncontrolled interior equilibrium (the controlled point lies nearby for the
// feedback gains of interest).  Classification builds the analytic 3x3
// Jacobian (third row (b1, b2, -b3) for linear phi) and takes the eigenvalues
// from the characteristic cubic via the trigonometric/Cardano resolvent with
// a complex Newton polish.
//
// With b = 0 the Jacobian is block-triangular, so the controlled spectrum is
// exactly the uncontrolled 2x2 pair plus -b3; the report reproduces that and
// the stable flag flips exactly when the plant pair is stable.

#pragma once

#include <array>
#include <complex>

#include "hvlab/equilibrium.hpp"
#include "hvlab/model.hpp"

namespace hvlab {

/// Stability summary of the controlled system at its equilibrium.
struct ControlledStabilityReport {
  ExtendedState equilibrium;
  std::array<std::array<double, 3>, 3> jacobian3;
  std::complex<double> eigenvalues[3];  ///< sorted by descending real part
  bool stable;                          ///< all real parts < 0
};

/// Analytic Jacobian of the controlled field (phi(sigma) = sigma) at any
/// admissible state.  Useful on its own for finite-difference cross-checks.
std::array<std::array<double, 3>, 3> controlled_jacobian(const Params& params,
                                                         const ControlParams& cp,
                                                         const ExtendedState& s);

/// Solves the stationarity system above by damped Newton iteration from the
/// uncontrolled equilibrium and four +/-10% perturbations in x and xi.
/// Throws NumericalError "no positive controlled equilibrium" when every
/// seed fails or the converged point violates positivity or the domain
/// requirement x + a - b xi > 0.
ExtendedState controlled_equilibrium(const Params& params, const ControlParams& cp);

/// Full report at the controlled equilibrium: Jacobian, eigenvalues (cubic
/// residual below 1e-10), and the stability verdict.
ControlledStabilityReport classify_controlled(const Params& params, const ControlParams& cp);

}  // namespace hvlab
