// Adaptive explicit Runge-Kutta integration for the 2-D plant, the 3-D
// controlled system, and the augmented tangent flows used by the Lyapunov
// analysis.
//
// The stepper is the classic Dormand-Prince 5(4) embedded pair (seven stages,
// first-same-as-last) with proportional-integral step-size control.  Three
// behaviours matter for this model family:
//
//   * Positivity by rejection: a trial step that would drive a monitored
//     component negative is rejected and retried at half the step, never
//     clamped (clamping injects mass and corrupts conservation-style checks).
//     If the step falls below h_min this way the run stops with status
//     step-underflow.
//
//   * Finite-time blow-up: the predator equation dy/dt = (d - e/(x+a)) y^2 is
//     a Riccati form that escapes to infinity in finite time whenever its
//     coefficient stays positive, so the stepper watches the max-norm of the
//     accepted state and stops with status blow-up past a threshold.
//
//   * Dense output: cubic Hermite interpolation on accepted steps, enough for
//     1 Hz sampling of the slow cycles this model produces without storing
//     internal stages.
//
// Fields may throw or return non-finite values (e.g. the controlled system's
// domain guard): during trial stages that counts as a step rejection; at the
// initial state it is a hard error.

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hvlab/errors.hpp"

namespace hvlab {

/// Dynamic state vector (2-D plant, 3-D controlled, 6-D augmented, ...).
using Vec = std::vector<double>;

/// Right-hand side f(t, y) -> dy/dt.
using Field = std::function<Vec(double, const Vec&)>;

/// Why an integration stopped.
enum class TrajectoryStatus {
  completed,       ///< reached t_end
  blow_up,         ///< accepted state max-norm exceeded blow_up_threshold
  step_underflow,  ///< repeated rejection pushed h below h_min
};

/// Render a status as its report string ("completed", "blow-up", ...).
std::string to_string(TrajectoryStatus st);

/// Stepper configuration.
struct IntegratorConfig {
  double rel_tol = 1e-9;            ///< local relative tolerance
  double abs_tol = 1e-12;           ///< local absolute tolerance
  double h_init = 1e-2;             ///< initial step
  double h_min = 1e-12;             ///< smallest permitted step
  double h_max = 1.0;               ///< largest permitted step
  double t_end = 0.0;               ///< integrate over [0, t_end]
  double blow_up_threshold = 1e6;   ///< stop when max-norm exceeds this
  double fixed_h = 0.0;             ///< > 0: fixed-step mode (order tests), adaptivity off
  int positivity_dim = -1;          ///< leading components kept >= 0; -1 = all
};

/// Time-stamped accepted states with the field values at each point
/// (the derivative column powers Hermite dense output).
struct Trajectory {
  std::vector<double> times;   ///< strictly increasing, starts at 0
  std::vector<Vec> states;     ///< one per time stamp
  std::vector<Vec> derivs;     ///< f(t_k, y_k), same length
  TrajectoryStatus status = TrajectoryStatus::completed;
  double t_end_requested = 0.0;
};

/// Throws ValidationError unless the config satisfies
/// 0 < h_min <= h_init <= h_max, positive tolerances, blow_up_threshold > 1,
/// t_end >= 0, fixed_h >= 0.
void validate(const IntegratorConfig& cfg);

/// Integrates f over [0, cfg.t_end] from s0.
/// Requires every positivity-monitored component of s0 to be strictly
/// positive.  Throws ValidationError for bad inputs and NumericalError when
/// the field is non-finite (or throws) at an accepted state.
Trajectory integrate(const Field& f, const Vec& s0, const IntegratorConfig& cfg);

/// Cubic Hermite dense-output evaluation at any t within the stored range.
Vec dense_eval(const Trajectory& traj, double t);

/// Uniform resampling at t = 0, dt, 2dt, ..., floor(t_end/dt)*dt via dense
/// output; result length floor(t_end/dt)+1.  Requires a completed trajectory
/// (throws ValidationError otherwise) and dt > 0.
std::vector<Vec> sample_uniform(const Trajectory& traj, double dt);

}  // namespace hvlab
