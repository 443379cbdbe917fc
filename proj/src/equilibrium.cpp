#include "hvlab/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace hvlab {

namespace {

// g(p) whose root is the Hopf point; same sign as P1 for fixed x*, c.
double hopf_g(double p, double xstar, double c) {
  return p * (1.0 - xstar) - xstar - c * std::pow(xstar, 1.0 - p);
}

}  // namespace

std::string to_string(Classification c) {
  switch (c) {
    case Classification::stable_node: return "stable-node";
    case Classification::stable_focus: return "stable-focus";
    case Classification::unstable_node: return "unstable-node";
    case Classification::unstable_focus: return "unstable-focus";
    case Classification::marginal: return "marginal";
  }
  return "unknown";
}

State interior_equilibrium(const Params& params) {
  validate(params);
  const double xstar = params.e / params.d - params.a;
  if (!(xstar > 0.0) || !(xstar < 1.0)) {
    throw ValidationError("no interior equilibrium: e/d - a must lie in (0,1)");
  }
  const double ystar = (1.0 - xstar) * (xpow(xstar, params.p) + params.c) / params.m;
  return {xstar, ystar};
}

CharacteristicCoefficients characteristic_coefficients(const Params& params) {
  const State eq = interior_equilibrium(params);
  const double xp = xpow(eq.x, params.p);
  const double den = xp + params.c;
  CharacteristicCoefficients cc{};
  cc.P1 = params.m * params.p * xp * eq.y / (den * den) - eq.x;
  cc.P2 = (params.m * eq.x / den) * (params.d * params.d * eq.y * eq.y / params.e);
  return cc;
}

StabilityReport classify_local(const Params& params) {
  StabilityReport rep{};
  rep.equilibrium = interior_equilibrium(params);
  const auto [P1, P2] = characteristic_coefficients(params);
  rep.P1 = P1;
  rep.P2 = P2;

  const double disc = P1 * P1 - 4.0 * P2;
  if (disc >= 0.0) {
    // Real roots; use the cancellation-safe form.
    const double sq = std::sqrt(disc);
    const double r1 = 0.5 * (P1 + (P1 >= 0.0 ? sq : -sq));
    const double r2 = (r1 != 0.0) ? P2 / r1 : 0.5 * (P1 - (P1 >= 0.0 ? sq : -sq));
    rep.eigenvalues[0] = {std::max(r1, r2), 0.0};
    rep.eigenvalues[1] = {std::min(r1, r2), 0.0};
  } else {
    const double im = 0.5 * std::sqrt(-disc);
    rep.eigenvalues[0] = {0.5 * P1, im};
    rep.eigenvalues[1] = {0.5 * P1, -im};
  }

  const double marginal_tol = 1e-9 * std::max(1.0, std::abs(rep.equilibrium.x));
  if (std::abs(P1) < marginal_tol) {
    rep.classification = Classification::marginal;
  } else if (P1 < 0.0) {
    rep.classification = disc < 0.0 ? Classification::stable_focus : Classification::stable_node;
  } else {
    rep.classification = disc < 0.0 ? Classification::unstable_focus : Classification::unstable_node;
  }
  rep.hopf_eligible = P1 * P1 < 4.0 * P2;
  return rep;
}

GlobalStabilityReport check_global_stability(const Params& params) {
  const State eq = interior_equilibrium(params);
  const double den = (1.0 - params.d) * (1.0 + params.a) - params.d;
  if (!(den > 0.0)) {
    throw ValidationError("denominator degenerate: (1-d)(1+a)-d must be positive");
  }
  GlobalStabilityReport rep{};
  const double xp = xpow(eq.x, params.p);
  rep.lhs1 = eq.y / xp - (1.0 + params.a) / den;
  const double inner = params.c * params.m / ((1.0 + params.c) * (xp + params.c)) -
                       params.e * eq.y / (params.a * (eq.x + params.a));
  rep.lhs2 = params.d * eq.x / params.a - 0.25 * inner * inner;
  rep.cond1 = rep.lhs1 > 0.0;
  rep.cond2 = rep.lhs2 > 0.0;
  return rep;
}

BoundsReport check_boundedness(const Params& params) {
  const State eq = interior_equilibrium(params);
  BoundsReport rep{};
  rep.mu = std::min(params.m, params.e);
  rep.M1 = 1.0;
  rep.M2 = params.d * (1.0 + rep.mu) / (params.m * rep.mu);
  rep.m1x = 1.0 - params.m * rep.M2 / (1.0 + params.c);
  const double den = (1.0 - params.d) * (1.0 + params.a) - params.d;
  // Reported as printed even when the denominator is nonpositive; the bound
  // is then inapplicable and bounds_valid says so.
  rep.m2y = (1.0 + params.a) / den;
  rep.cond_mu = rep.mu < params.d * eq.x / (xpow(eq.x, params.p) + params.c);
  // Evaluated exactly as printed although the left side is identically zero
  // at the equilibrium (d - e/(x*+a) = 0 by definition of x*).
  const double lhs_d = params.d - params.e / (eq.x + params.a);
  const double rhs_d = (params.d / params.m) * (eq.x / eq.y) * (eq.x / eq.y);
  rep.cond_d = lhs_d < rhs_d;
  rep.bounds_valid = std::isfinite(rep.m2y) && rep.m1x > 0.0 && rep.m2y > 0.0 && den > 0.0;
  return rep;
}

HopfResult hopf_point(const Params& params_without_p) {
  // x* = e/d - a does not involve p, so the scan in p is one-dimensional.
  Params probe = params_without_p;
  probe.p = 0.0;
  const State eq = interior_equilibrium(probe);  // validates 0 < x* < 1
  const double xstar = eq.x;
  const double c = params_without_p.c;

  HopfResult res{};
  res.g_at_0 = hopf_g(0.0, xstar, c);
  res.g_at_1 = hopf_g(1.0, xstar, c);

  // 200-interval sign scan.  An exact zero at a scan point is a root in its
  // own right (the bracket product test would miss it).
  constexpr int kScan = 200;
  double prev_p = 0.0;
  double prev_g = res.g_at_0;
  std::vector<std::pair<double, double>> brackets;
  if (prev_g == 0.0) res.roots.push_back(prev_p);
  for (int i = 1; i <= kScan; ++i) {
    const double p = static_cast<double>(i) / kScan;
    const double g = hopf_g(p, xstar, c);
    if (g == 0.0) {
      res.roots.push_back(p);
    } else if (prev_g != 0.0 && (prev_g < 0.0) != (g < 0.0)) {
      brackets.emplace_back(prev_p, p);
    }
    prev_p = p;
    prev_g = g;
  }

  for (auto [lo, hi] : brackets) {
    double glo = hopf_g(lo, xstar, c);
    // Bisection to a tight bracket.
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double gm = hopf_g(mid, xstar, c);
      if (gm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((gm < 0.0) == (glo < 0.0)) {
        lo = mid;
        glo = gm;
      } else {
        hi = mid;
      }
    }
    // Secant polish from the bracket endpoints.
    double r0 = lo, r1 = hi;
    double f0 = hopf_g(r0, xstar, c), f1 = hopf_g(r1, xstar, c);
    for (int it = 0; it < 8 && std::abs(f1) > 0.0 && f1 != f0; ++it) {
      const double r2 = r1 - f1 * (r1 - r0) / (f1 - f0);
      if (!std::isfinite(r2) || r2 < 0.0 || r2 > 1.0) break;
      r0 = r1; f0 = f1;
      r1 = r2; f1 = hopf_g(r1, xstar, c);
    }
    res.roots.push_back(std::abs(f1) <= std::abs(f0) ? r1 : r0);
  }

  std::sort(res.roots.begin(), res.roots.end());
  if (res.roots.empty()) {
    throw ValidationError("no Hopf point in [0,1]: g(p) has constant sign on the interval");
  }
  res.p1 = res.roots.front();
  return res;
}

double lyapunov_value(const Params& params, const State& s) {
  if (!(s.x > 0.0) || !(s.y > 0.0)) {
    throw ValidationError("energy diagnostic requires strictly positive densities");
  }
  const State eq = interior_equilibrium(params);
  const double vx = s.x - eq.x - eq.x * std::log(s.x / eq.x);
  const double vy = s.y - eq.y - eq.y * std::log(s.y / eq.y);
  return vx + vy;
}

}  // namespace hvlab
