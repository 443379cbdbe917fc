// Tests for the equilibrium layer: the closed-form interior equilibrium,
// the characteristic coefficients (P1, P2) and local classification, the
// boundedness and global-stability condition reports, the Hopf-point search
// in p, and the Lyapunov-candidate function.
//
// Reference doubles were computed with an independent double-precision
// implementation of the closed forms; comparisons at 1e-12 relative absorb
// only the last-ulp noise of differently-ordered arithmetic.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>

#include "hvlab/equilibrium.hpp"
#include "hvlab/errors.hpp"
#include "hvlab/model.hpp"
#include "oracles.hpp"

using namespace hvlab;
using hvlab::testing::close_rel;

namespace {

// The three canned parameter sets used throughout the suites.
const Params kStableSet{1.2, 0.3, 0.4, 0.25, 0.2, 0.7};
const Params kCycleSet{1.2, 1.0, 0.7, 0.2, 0.2, 0.7};
const Params kGlobalSet{0.5, 1.0, 0.2, 0.3, 1.0, 0.5};

}  // namespace

TEST_CASE("interior equilibrium closed form") {
  State eq = interior_equilibrium(kStableSet);
  CHECK(close_rel(eq.x, 0.425, 1e-15));
  CHECK(close_rel(eq.y, 0.40699422329193213, 1e-12));

  eq = interior_equilibrium(kCycleSet);
  CHECK(close_rel(eq.x, 0.08571428571428574, 1e-12));
  CHECK(close_rel(eq.y, 0.8983749955789346, 1e-12));

  eq = interior_equilibrium(kGlobalSet);
  CHECK(close_rel(eq.x, 0.4999999999999998, 1e-12));
  CHECK(close_rel(eq.y, 1.7071067811865481, 1e-12));
}

TEST_CASE("equilibrium residual vanishes") {
  std::mt19937_64 rng(0xE9ull);
  for (int trial = 0; trial < 100; ++trial) {
    const Params params = testing::random_params(rng);
    const State eq = interior_equilibrium(params);
    CHECK(eq.x > 0.0);
    CHECK(eq.x < 1.0);
    CHECK(eq.y > 0.0);
    const auto f = vector_field(params, eq);
    CHECK(std::abs(f[0]) < 1e-12);
    CHECK(std::abs(f[1]) < 1e-12);
  }
}

TEST_CASE("no interior equilibrium is rejected") {
  // e/d - a <= 0 on one side, >= 1 on the other.
  Params low{1.0, 0.3, 0.5, 0.1, 0.5, 0.5};  // e/d - a = -0.3
  CHECK_THROWS_AS(interior_equilibrium(low), ValidationError);
  Params high{1.0, 0.3, 0.5, 0.8, 0.2, 0.5};  // e/d - a = 1.4
  CHECK_THROWS_AS(interior_equilibrium(high), ValidationError);
  CHECK_THROWS_WITH_AS(interior_equilibrium(high), doctest::Contains("no interior equilibrium"),
                       ValidationError);
}

TEST_CASE("characteristic coefficients and classification: stable focus") {
  const auto rep = classify_local(kStableSet);
  CHECK(close_rel(rep.P1, -0.16466264430490002, 1e-12));
  CHECK(close_rel(rep.P2, 0.06365389652285817, 1e-12));
  CHECK(rep.classification == Classification::stable_focus);
  CHECK(to_string(rep.classification) == "stable-focus");
  CHECK(rep.hopf_eligible);  // complex pair: P1^2 < 4 P2
  CHECK(close_rel(rep.eigenvalues[0].real(), -0.08233132215245001, 1e-12));
  CHECK(close_rel(std::abs(rep.eigenvalues[0].imag()), 0.238485743631538, 1e-12));
  CHECK(rep.eigenvalues[0].imag() == -rep.eigenvalues[1].imag());
  CHECK(rep.eigenvalues[0].real() == rep.eigenvalues[1].real());
}

TEST_CASE("characteristic coefficients and classification: unstable focus") {
  const auto rep = classify_local(kCycleSet);
  CHECK(close_rel(rep.P1, 0.011506752250140195, 1e-12));
  CHECK(close_rel(rep.P2, 0.17248799915115542, 1e-12));
  CHECK(rep.classification == Classification::unstable_focus);
  CHECK(rep.hopf_eligible);
  CHECK(close_rel(rep.eigenvalues[0].real(), 0.005753376125070098, 1e-12));
  CHECK(close_rel(std::abs(rep.eigenvalues[0].imag()), 0.41527689294532016, 1e-12));
}

TEST_CASE("characteristic coefficients and classification: second stable focus") {
  const auto rep = classify_local(kGlobalSet);
  CHECK(close_rel(rep.P1, -0.396446609406726, 1e-12));
  CHECK(close_rel(rep.P2, 0.056903559372884945, 1e-12));
  CHECK(rep.classification == Classification::stable_focus);
  CHECK(close_rel(rep.eigenvalues[0].real(), -0.198223304703363, 1e-12));
  CHECK(close_rel(std::abs(rep.eigenvalues[0].imag()), 0.1327067475502382, 1e-12));
}

TEST_CASE("node classification when the discriminant is positive") {
  // p = 0 makes P1 = -x* exactly; a small d keeps P2 tiny, so P1^2 > 4 P2.
  const Params params{1.0, 0.0, 0.05, 0.05, 0.5, 0.0};
  const auto rep = classify_local(params);
  CHECK(close_rel(rep.equilibrium.x, 0.5, 1e-12));
  CHECK(close_rel(rep.P1, -0.5, 1e-12));
  CHECK(rep.P1 * rep.P1 > 4.0 * rep.P2);
  CHECK(rep.classification == Classification::stable_node);
  CHECK_FALSE(rep.hopf_eligible);
  CHECK(rep.eigenvalues[0].imag() == 0.0);
  CHECK(rep.eigenvalues[1].imag() == 0.0);
  CHECK(rep.eigenvalues[0].real() < 0.0);
  CHECK(rep.eigenvalues[1].real() < 0.0);
}

TEST_CASE("eigenvalues solve the characteristic polynomial") {
  std::mt19937_64 rng(0xE16ull);
  for (int trial = 0; trial < 100; ++trial) {
    const Params params = testing::random_params(rng);
    const auto rep = classify_local(params);
    CHECK(rep.P2 > 0.0);
    for (const auto& lam : rep.eigenvalues) {
      const std::complex<double> res = lam * lam - rep.P1 * lam + rep.P2;
      CHECK(std::abs(res) < 1e-10);
    }
    // Vieta: sum = P1, product = P2.
    const auto sum = rep.eigenvalues[0] + rep.eigenvalues[1];
    const auto prod = rep.eigenvalues[0] * rep.eigenvalues[1];
    CHECK(close_rel(sum.real(), rep.P1, 1e-10));
    CHECK(std::abs(sum.imag()) < 1e-12);
    CHECK(close_rel(prod.real(), rep.P2, 1e-10));
  }
}

TEST_CASE("marginal classification at the bifurcation point") {
  // At p = 0.5 this family has P1 = 0 exactly in double precision.
  const Params params{1.2, 0.25, 1.0, 0.45, 0.2, 0.5};
  const auto rep = classify_local(params);
  CHECK(rep.equilibrium.x == 0.25);
  CHECK(rep.P1 == 0.0);
  CHECK(close_rel(rep.P2, 0.19531249999999997, 1e-12));
  CHECK(rep.classification == Classification::marginal);
  CHECK(rep.hopf_eligible);
}

TEST_CASE("boundedness report") {
  // Stable set: the mu condition fails (m1x < 0), so bounds_valid is false.
  auto rep = check_boundedness(kStableSet);
  CHECK(rep.M1 == 1.0);
  CHECK(rep.mu == 0.25);
  CHECK(close_rel(rep.M2, 1.6666666666666667, 1e-12));
  CHECK(close_rel(rep.m1x, -0.5384615384615383, 1e-12));
  CHECK(close_rel(rep.m2y, 3.7500000000000004, 1e-12));
  CHECK_FALSE(rep.cond_mu);
  CHECK(rep.cond_d);
  CHECK_FALSE(rep.bounds_valid);

  // Cycle set: the m2y denominator is negative, so the lower bound is bogus.
  rep = check_boundedness(kCycleSet);
  CHECK(rep.mu == 0.2);
  CHECK(close_rel(rep.M2, 3.5, 1e-12));
  CHECK(close_rel(rep.m2y, -3.529411764705883, 1e-12));
  CHECK_FALSE(rep.bounds_valid);

  // Global set: every bound is well defined and positive.
  rep = check_boundedness(kGlobalSet);
  CHECK(rep.mu == 0.3);
  CHECK(close_rel(rep.M2, 1.7333333333333334, 1e-12));
  CHECK(close_rel(rep.m1x, 0.5666666666666667, 1e-12));
  CHECK(close_rel(rep.m2y, 1.4285714285714284, 1e-12));
  CHECK(rep.bounds_valid);
}

TEST_CASE("global stability report") {
  // Stable set: first inequality fails, second holds.
  auto rep = check_global_stability(kStableSet);
  CHECK(close_rel(rep.lhs1, -3.0091743784967573, 1e-12));
  CHECK(close_rel(rep.lhs2, 0.7904741272554345, 1e-12));
  CHECK_FALSE(rep.cond1);
  CHECK(rep.cond2);

  // Global set: both sufficient conditions hold.
  rep = check_global_stability(kGlobalSet);
  CHECK(close_rel(rep.lhs1, 0.9856421338016683, 1e-12));
  CHECK(close_rel(rep.lhs2, 0.09049621202458744, 1e-12));
  CHECK(rep.cond1);
  CHECK(rep.cond2);

  // Cycle set: (1-d)(1+a) - d < 0, the report is undefined.
  CHECK_THROWS_WITH_AS(check_global_stability(kCycleSet),
                       doctest::Contains("denominator degenerate"), ValidationError);
}

TEST_CASE("Hopf point in the group-behaviour exponent") {
  const Params base{1.2, 0.25, 1.0, 0.45, 0.2, 0.5};
  const auto hopf = hopf_point(base);
  CHECK(std::abs(hopf.p1 - 0.5) < 1e-6);
  CHECK(hopf.roots.size() == 1);
  CHECK(hopf.roots[0] == hopf.p1);
  CHECK(close_rel(hopf.g_at_0, -0.3125, 1e-12));
  CHECK(close_rel(hopf.g_at_1, 0.25, 1e-12));

  // The located point really is the marginal one: |P1(p1)| is tiny.
  Params at = base;
  at.p = hopf.p1;
  const auto coeff = characteristic_coefficients(at);
  CHECK(std::abs(coeff.P1) < 1e-8);
  CHECK(close_rel(coeff.P2, 0.19531249999999997, 1e-6));
}

TEST_CASE("Hopf point closed form at c = 0") {
  // With c = 0 the crossing condition is linear: p1 = x*/(1 - x*).
  Params base{1.2, 0.0, 1.0, 0.45, 0.2, 0.5};  // x* = 0.25
  const auto hopf = hopf_point(base);
  CHECK(std::abs(hopf.p1 - 0.3333333333333333) < 1e-9);
}

TEST_CASE("Hopf search rejects families without a crossing") {
  // For the stable set, g keeps one sign on all of [0, 1].
  CHECK_THROWS_WITH_AS(hopf_point(kStableSet), doctest::Contains("no Hopf point"),
                       ValidationError);
}

TEST_CASE("Lyapunov candidate function") {
  const State eq = interior_equilibrium(kGlobalSet);
  CHECK(lyapunov_value(kGlobalSet, eq) == 0.0);

  std::mt19937_64 rng(0x7Aull);
  for (int trial = 0; trial < 20; ++trial) {
    State s = testing::random_state(rng);
    if (std::abs(s.x - eq.x) < 1e-6 && std::abs(s.y - eq.y) < 1e-6) continue;
    CHECK(lyapunov_value(kGlobalSet, s) > 0.0);
  }
  CHECK_THROWS_AS(lyapunov_value(kGlobalSet, State{0.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(lyapunov_value(kGlobalSet, State{1.0, -0.2}), ValidationError);
}
