// Predator-prey model with a Hassell-Varley functional response and a
// generalist predator, in dimensional and nondimensional form, plus the
// indirectly controlled 3-D extension.
//
// Nondimensional plant (state x = prey, y = predator, all constants > 0,
// group-behaviour exponent p in [0,1]):
//
//     dx/dt = x(1 - x) - m x y / (x^p + c)
//     dy/dt = (d - e / (x + a)) y^2
//
// The predator reproduces sexually (hence the y^2) and has an alternative
// food source measured by a, so it can persist when the focal prey is scarce.
//
// Indirect control augments the plant with a scalar xi that shifts the
// predator's food-source term and relaxes toward a linear feedback signal:
//
//     dx/dt  = x(1 - x) - m x y / (x^p + c)
//     dy/dt  = (d - e / (x + a - b xi)) y^2
//     dxi/dt = phi(sigma),   sigma = b1 x + b2 y - b3 xi
//
// where phi is an admissible characteristic function: continuous, phi(0) = 0,
// sigma*phi(sigma) > 0 off the origin, and integral of phi divergent.
//
// Everything here is a pure function over immutable value types; the module
// is safe to use from any number of threads without synchronization.

#pragma once

#include <array>
#include <functional>
#include <vector>

#include "hvlab/errors.hpp"

namespace hvlab {

// ---------------------------------------------------------------------------
// Parameter and state types
// ---------------------------------------------------------------------------

/// Dimensional model constants.
struct DimensionalParams {
  double R;  ///< intrinsic prey growth rate (1/time)
  double K;  ///< prey carrying capacity (density)
  double M;  ///< maximum predation rate
  double C;  ///< environmental protection constant
  double D;  ///< predator sexual-reproduction rate
  double E;  ///< maximum predator death rate
  double A;  ///< alternative food-source measure
  double p;  ///< group-behaviour exponent, in [0,1]
};

/// Nondimensional model constants.
struct Params {
  double m;  ///< predation strength
  double c;  ///< environmental protection
  double d;  ///< predator reproduction
  double e;  ///< predator death
  double a;  ///< alternative food source
  double p;  ///< group-behaviour exponent, in [0,1]
};

/// Plant state: prey and predator densities (nonnegative).
struct State {
  double x;
  double y;
};

/// Feedback coefficients of the indirect control loop.
struct ControlParams {
  double b;   ///< coupling of xi into the predator food term (>= 0)
  double b1;  ///< prey weight in sigma
  double b2;  ///< predator weight in sigma
  double b3;  ///< xi relaxation weight in sigma (> 0)
};

/// Plant state extended with the control variable xi.
struct ExtendedState {
  double x;
  double y;
  double xi;
};

/// Real-valued characteristic function sigma -> phi(sigma).
using CharacteristicFn = std::function<double(double)>;

/// Per-criterion verdict of the admissibility screen for a characteristic
/// function.  The divergence verdict is a documented grid heuristic, not a
/// proof, hence the _heuristic suffix.
struct AdmissibilityReport {
  bool continuous_ok;            ///< finite at every grid point (continuity proxy)
  bool sign_ok;                  ///< phi(0)=0 and sigma*phi(sigma)>0 off zero
  bool divergence_ok_heuristic;  ///< integral still growing on the outer half-grid
  bool admissible;               ///< conjunction of the three verdicts
  double phi_at_zero;            ///< measured phi(0)
  double inner_integral_pos;     ///< integral of phi over [0, S/2]
  double outer_integral_pos;     ///< integral increment over [S/2, S]
  double inner_integral_neg;     ///< |integral| over [-S/2, 0]
  double outer_integral_neg;     ///< |integral| increment over [-S, -S/2]
};

// ---------------------------------------------------------------------------
// Validation helpers
// ---------------------------------------------------------------------------

/// Throws ValidationError unless all dimensional constants are positive and
/// p is in [0,1].
void validate(const DimensionalParams& dp);

/// Throws ValidationError unless m, d, e, a are positive, c >= 0, and p is in
/// [0,1].  c = 0 is accepted as a degenerate boundary (the functional response
/// stays defined for x > 0); c > 0 everywhere in the fitted regimes.
void validate(const Params& params);

/// Throws ValidationError unless b >= 0 and b3 > 0.
void validate(const ControlParams& cp);

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// x^p with the conventions this model needs: 0^p = 0 for p > 0, and x^0 = 1
/// for every x >= 0 (the p = 0 response degenerates continuously to a
/// Holling-type form).
double xpow(double x, double p);

/// Rescales dimensional constants to the nondimensional set:
/// m = M/(R K^(p-1)), c = C/K^p, d = D K/R, e = E/R, a = A/K, p unchanged.
Params nondimensionalize(const DimensionalParams& dp);

/// Right-hand side of the plant: (dx/dt, dy/dt) at state s.
/// Requires s.x >= 0 and s.y >= 0.
std::array<double, 2> vector_field(const Params& params, const State& s);

/// Analytic 2x2 Jacobian of vector_field at a general state with x > 0:
///   J11 = 1 - 2x - m y ((1-p) x^p + c) / (x^p + c)^2
///   J12 = -m x / (x^p + c)
///   J21 = e y^2 / (x + a)^2
///   J22 = 2 y (d - e / (x + a))
/// At the interior equilibrium J22 collapses to 0 and J21 equals d^2 y*^2 / e.
std::array<std::array<double, 2>, 2> jacobian(const Params& params, const State& s);

/// Right-hand side of the controlled system: (dx/dt, dy/dt, dxi/dt).
/// Requires x + a - b*xi > 0; throws ValidationError otherwise (the predator
/// death term is undefined there).
std::array<double, 3> extended_vector_field(const Params& params, const ControlParams& cp,
                                            const ExtendedState& s, const CharacteristicFn& phi);

/// Screens a characteristic function on a symmetric sample grid.
/// The grid must contain 0 and points of both signs.
///
/// Criteria, in the order the report lists them:
///  (i)   continuity proxy: every evaluation on the grid is finite;
///  (ii)  phi(0) = 0 (tolerance 1e-12 relative to the largest |phi| seen) and
///        sigma*phi(sigma) > 0 at every nonzero grid point;
///  (iii) divergence heuristic: on each side of 0 the cumulative trapezoid
///        integral of phi gains at least 10% as much over the outer half of
///        the grid as over the inner half ("still growing, no saturation").
///        Genuine divergence is undecidable from samples; the verdict is
///        labelled heuristic for that reason.
AdmissibilityReport check_admissible(const CharacteristicFn& phi, const std::vector<double>& grid);

/// Convenience overload: uniform 401-point grid on [-10, 10].
AdmissibilityReport check_admissible(const CharacteristicFn& phi);

}  // namespace hvlab
