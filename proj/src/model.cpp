#include "hvlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace hvlab {

namespace {

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void validate(const DimensionalParams& dp) {
  const double vals[] = {dp.R, dp.K, dp.M, dp.C, dp.D, dp.E, dp.A};
  for (double v : vals) {
    if (!finite(v) || v <= 0.0) {
      throw ValidationError("dimensional parameters must all be strictly positive");
    }
  }
  if (!finite(dp.p) || dp.p < 0.0 || dp.p > 1.0) {
    throw ValidationError("group-behaviour exponent p must lie in [0,1]");
  }
}

void validate(const Params& params) {
  const double vals[] = {params.m, params.d, params.e, params.a};
  for (double v : vals) {
    if (!finite(v) || v <= 0.0) {
      throw ValidationError("model parameters m, d, e, a must be strictly positive");
    }
  }
  if (!finite(params.c) || params.c < 0.0) {
    throw ValidationError("environmental protection c must be nonnegative");
  }
  if (!finite(params.p) || params.p < 0.0 || params.p > 1.0) {
    throw ValidationError("group-behaviour exponent p must lie in [0,1]");
  }
}

void validate(const ControlParams& cp) {
  if (!finite(cp.b) || cp.b < 0.0) {
    throw ValidationError("control coupling b must be nonnegative");
  }
  if (!finite(cp.b1) || !finite(cp.b2)) {
    throw ValidationError("feedback weights b1, b2 must be finite");
  }
  if (!finite(cp.b3) || cp.b3 <= 0.0) {
    throw ValidationError("feedback weight b3 must be strictly positive");
  }
}

double xpow(double x, double p) {
  if (p == 0.0) return 1.0;  // continuous extension at x = 0 included
  return std::pow(x, p);
}

Params nondimensionalize(const DimensionalParams& dp) {
  validate(dp);
  Params out{};
  out.m = dp.M / (dp.R * std::pow(dp.K, dp.p - 1.0));
  out.c = dp.C / std::pow(dp.K, dp.p);
  out.d = dp.D * dp.K / dp.R;
  out.e = dp.E / dp.R;
  out.a = dp.A / dp.K;
  out.p = dp.p;
  validate(out);
  return out;
}

std::array<double, 2> vector_field(const Params& params, const State& s) {
  const double x = s.x, y = s.y;
  double predation;
  if (x == 0.0) {
    // Continuous extension on the prey axis.  For p < 1 or c > 0 the
    // predation term vanishes with x; only the doubly degenerate corner
    // p = 1, c = 0 has the removable value m*y.
    predation = (params.p == 1.0 && params.c == 0.0) ? params.m * y : 0.0;
  } else {
    predation = params.m * x * y / (xpow(x, params.p) + params.c);
  }
  const double dx = x * (1.0 - x) - predation;
  const double dy = (params.d - params.e / (x + params.a)) * y * y;
  return {dx, dy};
}

std::array<std::array<double, 2>, 2> jacobian(const Params& params, const State& s) {
  if (!(s.x > 0.0)) {
    throw ValidationError("jacobian requires x > 0 (x^(p-1) is singular at x = 0)");
  }
  const double x = s.x, y = s.y;
  const double xp = xpow(x, params.p);
  const double den = xp + params.c;
  const double j11 = 1.0 - 2.0 * x - params.m * y * ((1.0 - params.p) * xp + params.c) / (den * den);
  const double j12 = -params.m * x / den;
  const double w = x + params.a;
  const double j21 = params.e * y * y / (w * w);
  const double j22 = 2.0 * y * (params.d - params.e / w);
  return {{{j11, j12}, {j21, j22}}};
}

std::array<double, 3> extended_vector_field(const Params& params, const ControlParams& cp,
                                            const ExtendedState& s, const CharacteristicFn& phi) {
  const double w = s.x + params.a - cp.b * s.xi;
  if (!(w > 0.0)) {
    throw ValidationError("predator food term x + a - b*xi must stay positive");
  }
  const double x = s.x, y = s.y;
  double predation;
  if (x == 0.0) {
    predation = (params.p == 1.0 && params.c == 0.0) ? params.m * y : 0.0;
  } else {
    predation = params.m * x * y / (xpow(x, params.p) + params.c);
  }
  const double dx = x * (1.0 - x) - predation;
  const double dy = (params.d - params.e / w) * y * y;
  const double sigma = cp.b1 * x + cp.b2 * y - cp.b3 * s.xi;
  return {dx, dy, phi(sigma)};
}

AdmissibilityReport check_admissible(const CharacteristicFn& phi, const std::vector<double>& grid) {
  bool has_zero = false, has_pos = false, has_neg = false;
  for (double g : grid) {
    if (g == 0.0) has_zero = true;
    if (g > 0.0) has_pos = true;
    if (g < 0.0) has_neg = true;
  }
  if (!has_zero || !has_pos || !has_neg) {
    throw ValidationError("admissibility grid must contain 0 and points of both signs");
  }

  std::vector<double> vals(grid.size());
  double max_abs = 0.0;
  bool continuous_ok = true;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    vals[i] = phi(grid[i]);
    if (!finite(vals[i])) continuous_ok = false;
    else max_abs = std::max(max_abs, std::abs(vals[i]));
  }

  AdmissibilityReport rep{};
  rep.continuous_ok = continuous_ok;

  double phi0 = 0.0;
  bool sign_ok = true;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] == 0.0) {
      phi0 = vals[i];
    } else if (!(grid[i] * vals[i] > 0.0)) {
      sign_ok = false;
    }
  }
  rep.phi_at_zero = phi0;
  const double zero_tol = 1e-12 * std::max(1.0, max_abs);
  if (!(std::abs(phi0) <= zero_tol)) sign_ok = false;
  if (!continuous_ok) sign_ok = false;
  rep.sign_ok = sign_ok;

  // Divergence heuristic: cumulative trapezoid per side, compared between the
  // inner half [0, S/2] and outer half [S/2, S] of the sampled range.
  auto side_integrals = [&](bool positive, double* inner, double* outer) {
    // Collect (|g|, phi) on one side, sorted outward from 0 by construction
    // of the caller-supplied grid being monotone; we do not assume order.
    std::vector<std::pair<double, double>> pts;
    pts.emplace_back(0.0, phi0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if ((positive && grid[i] > 0.0) || (!positive && grid[i] < 0.0)) {
        pts.emplace_back(std::abs(grid[i]), vals[i]);
      }
    }
    std::sort(pts.begin(), pts.end(),
              [](const auto& l, const auto& r) { return l.first < r.first; });
    const double smax = pts.back().first;
    double acc = 0.0, at_half = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      acc += 0.5 * (pts[i].second + pts[i - 1].second) * (pts[i].first - pts[i - 1].first);
      if (pts[i].first <= 0.5 * smax) at_half = acc;
    }
    // Integrating outward on the negative side flips the sign of dsigma; the
    // accumulated F(sigma) is nonnegative either way for sign-admissible phi.
    *inner = std::abs(at_half);
    *outer = std::abs(acc) - std::abs(at_half);
  };
  side_integrals(true, &rep.inner_integral_pos, &rep.outer_integral_pos);
  side_integrals(false, &rep.inner_integral_neg, &rep.outer_integral_neg);

  const bool pos_grows = rep.outer_integral_pos >= 0.1 * rep.inner_integral_pos;
  const bool neg_grows = rep.outer_integral_neg >= 0.1 * rep.inner_integral_neg;
  rep.divergence_ok_heuristic = continuous_ok && pos_grows && neg_grows;

  rep.admissible = rep.continuous_ok && rep.sign_ok && rep.divergence_ok_heuristic;
  return rep;
}

AdmissibilityReport check_admissible(const CharacteristicFn& phi) {
  std::vector<double> grid(401);
  for (int i = 0; i < 401; ++i) grid[i] = -10.0 + 20.0 * i / 400.0;
  grid[200] = 0.0;  // exact zero at the midpoint
  return check_admissible(phi, grid);
}

}  // namespace hvlab
