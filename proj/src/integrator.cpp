#include "hvlab/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace hvlab {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
// Fifth-order weights (also the a7j row: first-same-as-last).
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
// Difference between the 5th- and embedded 4th-order weights.
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;

// PI step-control constants (beta stabilizes mildly oscillatory error).
constexpr double kBeta = 0.04;
constexpr double kExpo1 = 0.2 - kBeta * 0.75;
constexpr double kSafe = 0.9;
constexpr double kMaxShrink = 5.0;   // one step shrinks by at most 1/5
constexpr double kMaxGrowth = 10.0;  // one step grows by at most 10x

bool all_finite(const Vec& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

double max_norm(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Evaluates the field, mapping exceptions and non-finite output to ok=false
// so the caller can treat a failed trial stage as a step rejection.
bool try_eval(const Field& f, double t, const Vec& y, Vec& out) {
  try {
    out = f(t, y);
  } catch (const std::exception&) {
    return false;
  }
  return out.size() == y.size() && all_finite(out);
}

}  // namespace

std::string to_string(TrajectoryStatus st) {
  switch (st) {
    case TrajectoryStatus::completed: return "completed";
    case TrajectoryStatus::blow_up: return "blow-up";
    case TrajectoryStatus::step_underflow: return "step-underflow";
  }
  return "unknown";
}

void validate(const IntegratorConfig& cfg) {
  if (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0)) {
    throw ValidationError("integrator tolerances must be positive");
  }
  if (!(cfg.h_min > 0.0) || !(cfg.h_min <= cfg.h_init) || !(cfg.h_init <= cfg.h_max)) {
    throw ValidationError("integrator steps must satisfy 0 < h_min <= h_init <= h_max");
  }
  if (!(cfg.blow_up_threshold > 1.0)) {
    throw ValidationError("blow_up_threshold must exceed 1");
  }
  if (!(cfg.t_end >= 0.0) || !std::isfinite(cfg.t_end)) {
    throw ValidationError("t_end must be finite and nonnegative");
  }
  if (cfg.fixed_h < 0.0) {
    throw ValidationError("fixed_h must be nonnegative");
  }
}

Trajectory integrate(const Field& f, const Vec& s0, const IntegratorConfig& cfg) {
  validate(cfg);
  if (s0.empty()) throw ValidationError("initial state must be nonempty");
  const std::size_t n = s0.size();
  const std::size_t pdim =
      cfg.positivity_dim < 0 ? n : std::min<std::size_t>(cfg.positivity_dim, n);
  for (std::size_t i = 0; i < pdim; ++i) {
    if (!(s0[i] > 0.0)) {
      throw ValidationError("initial state components must be strictly positive");
    }
  }
  if (!all_finite(s0)) throw ValidationError("initial state must be finite");

  Trajectory traj;
  traj.t_end_requested = cfg.t_end;

  Vec y = s0;
  Vec k1(n);
  try {
    k1 = f(0.0, y);
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception& ex) {
    throw NumericalError(std::string("field evaluation failed at the initial state: ") + ex.what());
  }
  if (k1.size() != n || !all_finite(k1)) {
    throw NumericalError("non-finite field evaluation at the initial state");
  }

  traj.times.push_back(0.0);
  traj.states.push_back(y);
  traj.derivs.push_back(k1);
  if (cfg.t_end == 0.0) return traj;

  const bool fixed = cfg.fixed_h > 0.0;
  double t = 0.0;
  double h = fixed ? cfg.fixed_h : std::clamp(cfg.h_init, cfg.h_min, cfg.h_max);
  double facold = 1e-4;

  Vec k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n);

  while (t < cfg.t_end) {
    const double h_left = cfg.t_end - t;
    if (h > h_left) h = h_left;

    bool stage_ok = true;
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    stage_ok = try_eval(f, t + c2 * h, ytmp, k2);
    if (stage_ok) {
      for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
      stage_ok = try_eval(f, t + c3 * h, ytmp, k3);
    }
    if (stage_ok) {
      for (std::size_t i = 0; i < n; ++i)
        ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      stage_ok = try_eval(f, t + c4 * h, ytmp, k4);
    }
    if (stage_ok) {
      for (std::size_t i = 0; i < n; ++i)
        ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      stage_ok = try_eval(f, t + c5 * h, ytmp, k5);
    }
    if (stage_ok) {
      for (std::size_t i = 0; i < n; ++i)
        ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      stage_ok = try_eval(f, t + h, ytmp, k6);
    }
    bool positive_ok = true;
    if (stage_ok) {
      for (std::size_t i = 0; i < n; ++i)
        ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
      if (!all_finite(ynew)) stage_ok = false;
      for (std::size_t i = 0; i < pdim && positive_ok; ++i) {
        if (ynew[i] < 0.0) positive_ok = false;
      }
      if (stage_ok && positive_ok) stage_ok = try_eval(f, t + h, ynew, k7);  // FSAL stage
    }

    if (!stage_ok || !positive_ok) {
      if (fixed) {
        throw NumericalError("field evaluation failed or positivity violated in fixed-step mode");
      }
      h *= 0.5;  // domain trouble: retreat geometrically
      if (h < cfg.h_min) {
        traj.status = TrajectoryStatus::step_underflow;
        return traj;
      }
      continue;
    }

    double err = 0.0;
    if (!fixed) {
      for (std::size_t i = 0; i < n; ++i) {
        const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                               e7 * k7[i]);
        const double sk = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        err += (ei / sk) * (ei / sk);
      }
      err = std::sqrt(err / static_cast<double>(n));
    }

    if (fixed || err <= 1.0) {
      t += h;
      y.swap(ynew);
      k1.swap(k7);
      traj.times.push_back(t);
      traj.states.push_back(y);
      traj.derivs.push_back(k1);
      if (max_norm(y) > cfg.blow_up_threshold) {
        traj.status = TrajectoryStatus::blow_up;
        return traj;
      }
      if (!fixed) {
        const double fac11 = std::pow(std::max(err, 1e-32), kExpo1);
        double fac = fac11 / std::pow(facold, kBeta);
        fac = std::max(1.0 / kMaxGrowth, std::min(kMaxShrink, fac / kSafe));
        facold = std::max(err, 1e-4);
        h = std::min(h / fac, cfg.h_max);
        if (h < cfg.h_min) h = cfg.h_min;
      }
    } else {
      const double fac11 = std::pow(err, kExpo1);
      h = h / std::min(kMaxShrink, fac11 / kSafe);
      if (h < cfg.h_min) {
        traj.status = TrajectoryStatus::step_underflow;
        return traj;
      }
    }
  }

  traj.status = TrajectoryStatus::completed;
  return traj;
}

Vec dense_eval(const Trajectory& traj, double t) {
  if (traj.times.empty()) throw ValidationError("empty trajectory");
  if (t <= traj.times.front()) return traj.states.front();
  if (t >= traj.times.back()) return traj.states.back();
  // Largest k with times[k] <= t.
  const auto it = std::upper_bound(traj.times.begin(), traj.times.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - traj.times.begin()) - 1;
  const double t0 = traj.times[k], t1 = traj.times[k + 1];
  const double dt = t1 - t0;
  const double s = (t - t0) / dt;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  const Vec& y0 = traj.states[k];
  const Vec& y1 = traj.states[k + 1];
  const Vec& d0 = traj.derivs[k];
  const Vec& d1 = traj.derivs[k + 1];
  Vec out(y0.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = h00 * y0[i] + h10 * dt * d0[i] + h01 * y1[i] + h11 * dt * d1[i];
  }
  return out;
}

std::vector<Vec> sample_uniform(const Trajectory& traj, double dt) {
  if (traj.status != TrajectoryStatus::completed) {
    throw ValidationError("sample_uniform requires a completed trajectory");
  }
  if (!(dt > 0.0)) throw ValidationError("sampling interval must be positive");
  const double t_end = traj.t_end_requested;
  const std::size_t count = static_cast<std::size_t>(std::floor(t_end / dt)) + 1;
  std::vector<Vec> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    out.push_back(dense_eval(traj, static_cast<double>(k) * dt));
  }
  return out;
}

}  // namespace hvlab
