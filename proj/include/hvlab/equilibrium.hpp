// Closed-form interior equilibrium of the plant, local stability
// classification through the characteristic coefficients, sufficient-condition
// checks for boundedness and global stability, the Hopf-point solver in the
// group-behaviour exponent p, and the energy (Lyapunov) function diagnostic.
//
// The interior equilibrium is explicit:
//
//     x* = e/d - a                      (exists iff 0 < e/d - a < 1)
//     y* = (1/m) (1 - x*) (x*^p + c)
//
// The linearization's characteristic polynomial is lambda^2 - P1 lambda + P2
// with
//
//     P1 = m p x*^p y* / (x*^p + c)^2 - x*      (trace; J22 = 0 at x*)
//     P2 = (m x* / (x*^p + c)) d^2 y*^2 / e     (determinant; always > 0)
//
// so the point is locally asymptotically stable iff P1 < 0, and a Hopf
// bifurcation in p happens where P1 crosses 0 with P1^2 < 4 P2.  P1 has the
// same sign as
//
//     g(p) = p (1 - x*) - x* - c x*^(1-p)
//
// whose root in [0,1] the Hopf solver locates.
//
// All functions are pure; safe for unrestricted concurrent use.

#pragma once

#include <complex>
#include <string>
#include <vector>

#include "hvlab/model.hpp"

namespace hvlab {

/// How the linearization classifies the interior equilibrium.
enum class Classification {
  stable_node,
  stable_focus,
  unstable_node,
  unstable_focus,
  marginal,
};

/// Render a Classification as its report string ("stable-focus", ...).
std::string to_string(Classification c);

/// Local stability summary at the interior equilibrium.
struct StabilityReport {
  State equilibrium;                      ///< (x*, y*)
  double P1;                              ///< trace-like coefficient
  double P2;                              ///< determinant-like coefficient (> 0)
  std::complex<double> eigenvalues[2];    ///< roots of lambda^2 - P1 lambda + P2
  Classification classification;
  bool hopf_eligible;                     ///< P1^2 < 4 P2 (complex pair)
};

/// Evaluated sufficient conditions for trajectory boundedness, with the
/// explicit bounds they certify.
struct BoundsReport {
  double M1;        ///< prey upper bound, exactly 1
  double M2;        ///< predator upper bound d(1+mu)/(m mu)
  double m1x;       ///< asymptotic prey lower bound 1 - m M2/(1+c)
  double m2y;       ///< asymptotic predator lower bound (1+a)/((1-d)(1+a)-d)
  double mu;        ///< mu = min{m, e}
  bool cond_mu;     ///< mu < d x* / (x*^p + c)
  bool cond_d;      ///< d - e/(x*+a) < (d/m)(x*/y*)^2, as printed (lhs is 0 at x*)
  bool bounds_valid;///< all four bounds well defined and positive
};

/// Evaluated left-hand sides of the two sufficient global-stability
/// inequalities, with sign booleans.
struct GlobalStabilityReport {
  double lhs1;  ///< y*/x*^p - (1+a)/((1-d)(1+a)-d)
  double lhs2;  ///< d x*/a - (1/4) (c m/((1+c)(x*^p+c)) - e y*/(a(x*+a)))^2
  bool cond1;   ///< lhs1 > 0
  bool cond2;   ///< lhs2 > 0
};

/// Result of the Hopf-point search in p over [0,1].
struct HopfResult {
  double p1;                  ///< first root of g (ascending in p)
  std::vector<double> roots;  ///< every root located by the scan, ascending
  double g_at_0;              ///< bracket diagnostics
  double g_at_1;
};

/// Closed-form interior equilibrium.  Throws ValidationError
/// "no interior equilibrium" unless 0 < e/d - a < 1.
State interior_equilibrium(const Params& params);

/// (P1, P2) of the characteristic polynomial at the interior equilibrium.
struct CharacteristicCoefficients {
  double P1;
  double P2;
};
CharacteristicCoefficients characteristic_coefficients(const Params& params);

/// Full local classification at the interior equilibrium.
/// Marginal means |P1| < 1e-9 * max(1, |x*|); otherwise the sign of P1 picks
/// stable/unstable and the sign of P1^2 - 4 P2 picks node/focus.
StabilityReport classify_local(const Params& params);

/// Evaluates the two sufficient global-stability inequalities exactly as
/// printed.  Throws ValidationError "denominator degenerate" when
/// (1-d)(1+a) - d <= 0, where lhs1 is undefined as a positive bound.
GlobalStabilityReport check_global_stability(const Params& params);

/// Evaluates the boundedness conditions and bounds.  m2y is reported even
/// when its denominator is nonpositive; bounds_valid is false in that case
/// (the lower bounds are inapplicable, not wrong).
BoundsReport check_boundedness(const Params& params);

/// Locates the Hopf point p1 in [0,1]: the root of g above, found by a
/// 200-interval sign scan (exact zeros at scan points count as roots)
/// followed by bisection and a secant polish to |g(p1)| < 1e-10.  At the
/// result, |P1| < 1e-8.  The p field of the input is ignored.
/// Throws ValidationError "no Hopf point in [0,1]" when g has constant sign.
HopfResult hopf_point(const Params& params_without_p);

/// Energy diagnostic V(x,y) = [x - x* - x* ln(x/x*)] + [y - y* - y* ln(y/y*)].
/// Nonnegative, zero exactly at the equilibrium.  Requires x, y > 0.
double lyapunov_value(const Params& params, const State& s);

}  // namespace hvlab
