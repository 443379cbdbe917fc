#include "hvlab/control.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace hvlab {

namespace {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

// Stationarity residual; requires x > 0 (x^p is evaluated with p - 1 < 0 in
// the Jacobian), reported through *ok.
bool residual(const Params& pr, const ControlParams& cp, const Vec3& v, Vec3* out) {
  const double x = v[0], y = v[1], xi = v[2];
  if (!(x > 0.0)) return false;
  const double xp = xpow(x, pr.p);
  (*out)[0] = 1.0 - x - pr.m * y / (xp + pr.c);
  (*out)[1] = x + pr.a - cp.b * xi - pr.e / pr.d;
  (*out)[2] = cp.b1 * x + cp.b2 * y - cp.b3 * xi;
  return std::isfinite((*out)[0]) && std::isfinite((*out)[1]) && std::isfinite((*out)[2]);
}

// Jacobian of the stationarity residual.
Mat3 residual_jacobian(const Params& pr, const ControlParams& cp, const Vec3& v) {
  const double x = v[0], y = v[1];
  const double xp = xpow(x, pr.p);
  const double den = xp + pr.c;
  Mat3 J{};
  J[0][0] = -1.0 + pr.m * y * pr.p * xpow(x, pr.p - 1.0) / (den * den);
  J[0][1] = -pr.m / den;
  J[0][2] = 0.0;
  J[1][0] = 1.0;
  J[1][1] = 0.0;
  J[1][2] = -cp.b;
  J[2][0] = cp.b1;
  J[2][1] = cp.b2;
  J[2][2] = -cp.b3;
  return J;
}

double norm2(const Vec3& v) { return v[0] * v[0] + v[1] * v[1] + v[2] * v[2]; }

double norm_inf(const Vec3& v) {
  return std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])});
}

// Solves A x = rhs by Gaussian elimination with partial pivoting.
bool solve3(Mat3 A, Vec3 rhs, Vec3* x) {
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r) {
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    }
    if (std::abs(A[piv][col]) < 1e-300) return false;
    std::swap(A[piv], A[col]);
    std::swap(rhs[piv], rhs[col]);
    for (int r = col + 1; r < 3; ++r) {
      const double f = A[r][col] / A[col][col];
      for (int c = col; c < 3; ++c) A[r][c] -= f * A[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  for (int r = 2; r >= 0; --r) {
    double acc = rhs[r];
    for (int c = r + 1; c < 3; ++c) acc -= A[r][c] * (*x)[c];
    (*x)[r] = acc / A[r][r];
  }
  return std::isfinite((*x)[0]) && std::isfinite((*x)[1]) && std::isfinite((*x)[2]);
}

// Damped Newton from one seed.  Returns true on convergence to a root with
// ||R||_inf < 1e-13.
bool newton_from(const Params& pr, const ControlParams& cp, Vec3 v, Vec3* root) {
  Vec3 R{};
  if (!residual(pr, cp, v, &R)) return false;
  for (int it = 0; it < 100; ++it) {
    if (norm_inf(R) < 1e-13) {
      *root = v;
      return true;
    }
    const Mat3 J = residual_jacobian(pr, cp, v);
    Vec3 step{};
    const Vec3 neg{-R[0], -R[1], -R[2]};
    if (!solve3(J, neg, &step)) return false;
    // Backtracking line search on ||R||^2.
    const double base = norm2(R);
    double alpha = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls) {
      const Vec3 trial{v[0] + alpha * step[0], v[1] + alpha * step[1], v[2] + alpha * step[2]};
      Vec3 Rt{};
      if (residual(pr, cp, trial, &Rt) && norm2(Rt) < base) {
        v = trial;
        R = Rt;
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) return false;
  }
  return false;
}

// Characteristic cubic of M: lambda^3 + A lambda^2 + B lambda + C.
void characteristic_cubic(const Mat3& M, double* A, double* B, double* C) {
  const double tr = M[0][0] + M[1][1] + M[2][2];
  const double m00 = M[1][1] * M[2][2] - M[1][2] * M[2][1];
  const double m11 = M[0][0] * M[2][2] - M[0][2] * M[2][0];
  const double m22 = M[0][0] * M[1][1] - M[0][1] * M[1][0];
  const double det = M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) -
                     M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
                     M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
  *A = -tr;
  *B = m00 + m11 + m22;
  *C = -det;
}

// Roots of lambda^3 + A lambda^2 + B lambda + C by depressed-cubic resolvent
// plus a complex Newton polish on the original cubic.
std::array<std::complex<double>, 3> cubic_roots(double A, double B, double C) {
  const double p = B - A * A / 3.0;
  const double q = 2.0 * A * A * A / 27.0 - A * B / 3.0 + C;
  const double shift = -A / 3.0;

  std::array<std::complex<double>, 3> mu{};
  const double disc = 0.25 * q * q + p * p * p / 27.0;
  if (disc > 0.0) {
    // One real root, one complex pair.
    const double sq = std::sqrt(disc);
    const double u = std::cbrt(-0.5 * q + sq);
    const double w = std::cbrt(-0.5 * q - sq);
    const double mu1 = u + w;
    // Quadratic factor mu^2 + mu1*mu + (p + mu1^2).
    const double qb = mu1, qc = p + mu1 * mu1;
    const double qd = qb * qb - 4.0 * qc;  // < 0 here
    mu[0] = {mu1, 0.0};
    mu[1] = {-0.5 * qb, 0.5 * std::sqrt(std::max(-qd, 0.0))};
    mu[2] = std::conj(mu[1]);
  } else if (p == 0.0 && q == 0.0) {
    mu[0] = mu[1] = mu[2] = {0.0, 0.0};
  } else {
    // Three real roots (trigonometric form).
    const double r = std::sqrt(-p / 3.0);
    double cosarg = 3.0 * q / (2.0 * p * r);
    cosarg = std::clamp(cosarg, -1.0, 1.0);
    const double theta = std::acos(cosarg);
    for (int k = 0; k < 3; ++k) {
      mu[static_cast<std::size_t>(k)] = {
          2.0 * r * std::cos((theta - 2.0 * std::numbers::pi * k) / 3.0), 0.0};
    }
  }

  std::array<std::complex<double>, 3> roots{};
  for (int k = 0; k < 3; ++k) {
    std::complex<double> z = mu[static_cast<std::size_t>(k)] + shift;
    for (int it = 0; it < 4; ++it) {  // Newton polish on the original cubic
      const std::complex<double> f = ((z + A) * z + B) * z + C;
      const std::complex<double> df = (3.0 * z + 2.0 * A) * z + B;
      if (std::abs(df) < 1e-300) break;
      const std::complex<double> znew = z - f / df;
      if (std::abs(znew - z) < 1e-16 * (1.0 + std::abs(z))) {
        z = znew;
        break;
      }
      z = znew;
    }
    if (std::abs(z.imag()) < 1e-12 * (1.0 + std::abs(z.real()))) z = {z.real(), 0.0};
    roots[static_cast<std::size_t>(k)] = z;
  }
  std::sort(roots.begin(), roots.end(), [](const auto& l, const auto& r) {
    if (l.real() != r.real()) return l.real() > r.real();
    return l.imag() > r.imag();
  });
  return roots;
}

}  // namespace

Mat3 controlled_jacobian(const Params& params, const ControlParams& cp, const ExtendedState& s) {
  const double w = s.x + params.a - cp.b * s.xi;
  if (!(s.x > 0.0) || !(w > 0.0)) {
    throw ValidationError("controlled Jacobian requires x > 0 and x + a - b*xi > 0");
  }
  const double x = s.x, y = s.y;
  const double xp = xpow(x, params.p);
  const double den = xp + params.c;
  Mat3 J{};
  J[0][0] = 1.0 - 2.0 * x - params.m * y * ((1.0 - params.p) * xp + params.c) / (den * den);
  J[0][1] = -params.m * x / den;
  J[0][2] = 0.0;
  J[1][0] = params.e * y * y / (w * w);
  J[1][1] = 2.0 * y * (params.d - params.e / w);
  J[1][2] = -cp.b * params.e * y * y / (w * w);
  J[2][0] = cp.b1;
  J[2][1] = cp.b2;
  J[2][2] = -cp.b3;
  return J;
}

ExtendedState controlled_equilibrium(const Params& params, const ControlParams& cp) {
  validate(params);
  validate(cp);
  const State eq = interior_equilibrium(params);  // seeds cluster around it
  const double xi0 = (cp.b1 * eq.x + cp.b2 * eq.y) / cp.b3;

  const Vec3 seeds[5] = {
      {eq.x, eq.y, xi0},
      {1.1 * eq.x, eq.y, xi0},
      {0.9 * eq.x, eq.y, xi0},
      {eq.x, eq.y, 1.1 * xi0},
      {eq.x, eq.y, 0.9 * xi0},
  };

  for (const Vec3& seed : seeds) {
    Vec3 root{};
    if (!newton_from(params, cp, seed, &root)) continue;
    const double w = root[0] + params.a - cp.b * root[2];
    if (root[0] > 0.0 && root[1] > 0.0 && w > 0.0) {
      return {root[0], root[1], root[2]};
    }
  }
  throw NumericalError(
      "no positive controlled equilibrium: Newton failed from all seeds or the "
      "solution violates positivity");
}

ControlledStabilityReport classify_controlled(const Params& params, const ControlParams& cp) {
  ControlledStabilityReport rep{};
  rep.equilibrium = controlled_equilibrium(params, cp);
  rep.jacobian3 = controlled_jacobian(params, cp, rep.equilibrium);

  double A = 0.0, B = 0.0, C = 0.0;
  characteristic_cubic(rep.jacobian3, &A, &B, &C);
  const auto roots = cubic_roots(A, B, C);
  double max_re = roots[0].real();
  for (int k = 0; k < 3; ++k) {
    rep.eigenvalues[k] = roots[static_cast<std::size_t>(k)];
    max_re = std::max(max_re, roots[static_cast<std::size_t>(k)].real());
  }
  rep.stable = max_re < 0.0;
  return rep;
}

}  // namespace hvlab
