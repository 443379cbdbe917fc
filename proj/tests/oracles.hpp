// Shared helpers for the test suites: relative-closeness predicates,
// finite-difference Jacobians used to cross-check the analytic ones, and
// random generators for valid parameter/state draws.
//
// All finite differences are central, with a per-coordinate step
// h_i = 1e-6 * max(1, |v_i|), and comparisons use the mixed metric
// |fd - an| <= tol * max(|an|, |fd|, 1) so that entries near zero are
// judged absolutely and large entries relatively.
#pragma once

#include <array>
#include <cmath>
#include <random>

#include "hvlab/model.hpp"

namespace hvlab::testing {

/// Mixed absolute/relative closeness: |a - b| <= tol * max(|a|, |b|, 1).
inline bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1.0});
}

/// Central-difference Jacobian of the plant field at s.
inline std::array<std::array<double, 2>, 2> fd_jacobian2(const Params& params, const State& s) {
  std::array<std::array<double, 2>, 2> J{};
  const double base[2] = {s.x, s.y};
  for (int j = 0; j < 2; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(base[j]));
    State sp = s, sm = s;
    (j == 0 ? sp.x : sp.y) += h;
    (j == 0 ? sm.x : sm.y) -= h;
    const auto fp = vector_field(params, sp);
    const auto fm = vector_field(params, sm);
    for (int i = 0; i < 2; ++i) J[i][j] = (fp[i] - fm[i]) / (2.0 * h);
  }
  return J;
}

/// Central-difference Jacobian of the controlled field (phi(sigma) = sigma).
inline std::array<std::array<double, 3>, 3> fd_jacobian3(const Params& params,
                                                         const ControlParams& cp,
                                                         const ExtendedState& s) {
  const CharacteristicFn phi = [](double sigma) { return sigma; };
  std::array<std::array<double, 3>, 3> J{};
  const double base[3] = {s.x, s.y, s.xi};
  for (int j = 0; j < 3; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(base[j]));
    ExtendedState sp = s, sm = s;
    double* cp_p = (j == 0 ? &sp.x : j == 1 ? &sp.y : &sp.xi);
    double* cm_p = (j == 0 ? &sm.x : j == 1 ? &sm.y : &sm.xi);
    *cp_p += h;
    *cm_p -= h;
    const auto fp = extended_vector_field(params, cp, sp, phi);
    const auto fm = extended_vector_field(params, cp, sm, phi);
    for (int i = 0; i < 3; ++i) J[i][j] = (fp[i] - fm[i]) / (2.0 * h);
  }
  return J;
}

/// Uniform double in [lo, hi).
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Random parameter set guaranteed to have an interior equilibrium:
/// x* = e/d - a is drawn in (0.05, 0.95) and e set accordingly.
inline Params random_params(std::mt19937_64& rng) {
  Params params{};
  params.m = uniform(rng, 0.3, 2.0);
  params.c = uniform(rng, 0.05, 1.5);
  params.d = uniform(rng, 0.1, 1.5);
  params.a = uniform(rng, 0.05, 1.0);
  params.p = uniform(rng, 0.0, 1.0);
  const double xstar = uniform(rng, 0.05, 0.95);
  params.e = params.d * (xstar + params.a);
  return params;
}

/// Random strictly positive state away from the x = 0 singular line.
inline State random_state(std::mt19937_64& rng) {
  return State{uniform(rng, 0.05, 1.2), uniform(rng, 0.05, 1.5)};
}

}  // namespace hvlab::testing
