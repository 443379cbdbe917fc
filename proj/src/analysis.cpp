#include "hvlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <thread>

namespace hvlab {

namespace {

Field plant_field(const Params& params) {
  return [params](double, const Vec& s) -> Vec {
    const auto r = vector_field(params, State{s[0], s[1]});
    return {r[0], r[1]};
  };
}

// Plant + variational equation dPhi/dt = J Phi, Phi stored row-major in
// s[2..5] = (phi11, phi12, phi21, phi22).
Field augmented_field(const Params& params) {
  return [params](double, const Vec& s) -> Vec {
    const State st{s[0], s[1]};
    const auto r = vector_field(params, st);
    const auto J = jacobian(params, st);
    return {r[0],
            r[1],
            J[0][0] * s[2] + J[0][1] * s[4],
            J[0][0] * s[3] + J[0][1] * s[5],
            J[1][0] * s[2] + J[1][1] * s[4],
            J[1][0] * s[3] + J[1][1] * s[5]};
  };
}

// In-place iterative radix-2 FFT (decimation in time); n must be a power of 2.
void fft(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

struct Peak {
  double t;
  double height;
};

// 3-point quadratic refinement of interior sample maxima.
std::vector<Peak> find_peaks(const std::vector<double>& ts, const std::vector<double>& xs) {
  std::vector<Peak> peaks;
  for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
    if (xs[i] > xs[i - 1] && xs[i] > xs[i + 1]) {
      const double denom = xs[i - 1] - 2.0 * xs[i] + xs[i + 1];
      double dt_frac = 0.0;
      if (denom != 0.0) dt_frac = 0.5 * (xs[i - 1] - xs[i + 1]) / denom;
      const double dt = ts[i] - ts[i - 1];
      const double t_peak = ts[i] + dt_frac * dt;
      const double h_peak =
          denom != 0.0 ? xs[i] - 0.125 * (xs[i - 1] - xs[i + 1]) * (xs[i - 1] - xs[i + 1]) / denom
                       : xs[i];
      peaks.push_back({t_peak, h_peak});
    }
  }
  return peaks;
}

struct SweepEntry {
  double min_x;
  double max_x;
  Regime regime;
  State final_state;
  bool completed;
};

SweepEntry sweep_one(const Params& params, const State& seed, const SweepTimes& times,
                     const IntegratorConfig& cfg_in) {
  IntegratorConfig cfg = cfg_in;
  cfg.t_end = times.transient + times.window;
  cfg.positivity_dim = -1;
  const Trajectory traj = integrate(plant_field(params), Vec{seed.x, seed.y}, cfg);

  SweepEntry entry{};
  entry.completed = traj.status == TrajectoryStatus::completed;

  if (traj.status != TrajectoryStatus::completed) {
    // Keep the extrema of whatever was recorded; prefer the post-transient
    // tail when the stop happened after the transient.
    double lo = traj.states.front()[0], hi = lo;
    bool any_post = false;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
      if (traj.times[i] >= times.transient) {
        if (!any_post) {
          lo = hi = traj.states[i][0];
          any_post = true;
        } else {
          lo = std::min(lo, traj.states[i][0]);
          hi = std::max(hi, traj.states[i][0]);
        }
      }
    }
    if (!any_post) {
      for (const auto& s : traj.states) {
        lo = std::min(lo, s[0]);
        hi = std::max(hi, s[0]);
      }
    }
    entry.min_x = lo;
    entry.max_x = hi;
    entry.regime = Regime::blow_up;
    const auto& last = traj.states.back();
    entry.final_state = {last[0], last[1]};
    return entry;
  }

  const CycleReport rep = detect_limit_cycle(traj, times.transient);
  entry.min_x = rep.x_min;
  entry.max_x = rep.x_max;
  entry.final_state = rep.final_state;
  switch (rep.kind) {
    case CycleKind::fixed_point:
      entry.regime = Regime::fixed_point;
      break;
    case CycleKind::limit_cycle:
      entry.regime = Regime::limit_cycle;
      break;
    case CycleKind::undecided: {
      // Envelope fallback: a decaying spiral shows contracting peak heights;
      // a flat or growing envelope means a cycle is (still) present.
      const std::vector<Vec> samples = sample_uniform(traj, 0.1);
      std::vector<double> ts, xs;
      for (std::size_t k = 0; k < samples.size(); ++k) {
        const double t = 0.1 * static_cast<double>(k);
        if (t >= times.transient) {
          ts.push_back(t);
          xs.push_back(samples[k][0]);
        }
      }
      const auto peaks = find_peaks(ts, xs);
      if (peaks.size() < 2) {
        entry.regime = Regime::fixed_point;
      } else {
        const double scale = std::max(std::abs(peaks.front().height), 1e-12);
        const double drop = peaks.front().height - peaks.back().height;
        entry.regime = (drop > 1e-3 * scale) ? Regime::fixed_point : Regime::limit_cycle;
      }
      break;
    }
  }
  return entry;
}

}  // namespace

std::string to_string(Regime r) {
  switch (r) {
    case Regime::fixed_point: return "fixed-point";
    case Regime::limit_cycle: return "limit-cycle";
    case Regime::blow_up: return "blow-up";
  }
  return "unknown";
}

LyapunovResult lyapunov_exponents(const Params& params, const State& s0, double total_time,
                                  double transient, const IntegratorConfig& base) {
  validate(params);
  if (!(s0.x > 0.0) || !(s0.y > 0.0)) {
    throw ValidationError("initial state must be strictly positive");
  }
  if (!(total_time > transient) || !(transient > 0.0)) {
    throw ValidationError("need total_time > transient > 0");
  }

  constexpr double kRenorm = 1.0;  // renormalization interval (time units)
  const Field aug = augmented_field(params);

  IntegratorConfig cfg = base;
  cfg.t_end = kRenorm;
  cfg.positivity_dim = 2;  // the tangent entries may legitimately go negative

  Vec s{s0.x, s0.y, 1.0, 0.0, 0.0, 1.0};
  double t = 0.0;
  double sum1 = 0.0, sum2 = 0.0;

  LyapunovResult res{};
  res.transient_discarded = transient;
  res.total_time = total_time;

  while (t < total_time - 1e-9) {
    IntegratorConfig seg_cfg = cfg;
    seg_cfg.t_end = std::min(kRenorm, total_time - t);  // short final segment
    const Trajectory seg = integrate(aug, s, seg_cfg);
    if (seg.status != TrajectoryStatus::completed) {
      throw NumericalError("trajectory " + to_string(seg.status) +
                           " during Lyapunov-exponent estimation");
    }
    s = seg.states.back();
    t += seg_cfg.t_end;

    // Modified Gram-Schmidt on the tangent columns (phi11,phi21), (phi12,phi22).
    double c1x = s[2], c1y = s[4];
    double c2x = s[3], c2y = s[5];
    const double r11 = std::hypot(c1x, c1y);
    if (!(r11 > 0.0)) throw NumericalError("degenerate tangent frame");
    c1x /= r11;
    c1y /= r11;
    const double r12 = c1x * c2x + c1y * c2y;
    c2x -= r12 * c1x;
    c2y -= r12 * c1y;
    const double r22 = std::hypot(c2x, c2y);
    if (!(r22 > 0.0)) throw NumericalError("degenerate tangent frame");
    c2x /= r22;
    c2y /= r22;
    s[2] = c1x;
    s[3] = c2x;
    s[4] = c1y;
    s[5] = c2y;

    if (t > transient + 1e-12) {
      sum1 += std::log(r11);
      sum2 += std::log(r22);
      const double span = t - transient;
      res.convergence_history.push_back({t, sum1 / span, sum2 / span});
    }
  }

  const double span = total_time - transient;
  double l1 = sum1 / span, l2 = sum2 / span;
  if (l1 < l2) std::swap(l1, l2);
  res.lambda1 = l1;
  res.lambda2 = l2;

  // Non-convergence flag: shift of the quarter-averaged running estimates
  // between the third and fourth quarters of the averaging window, relative
  // to the exponent scale.  Quarter means cancel the periodic wiggle a
  // running average shows on a limit cycle while still exposing real drift
  // (an unfinished transient keeps shifting the mean).
  res.converged = true;
  const double t_q3 = transient + 0.50 * span;
  const double t_q4 = transient + 0.75 * span;
  const double scale = std::max({std::abs(l1), std::abs(l2), 1e-3});
  for (int comp = 1; comp <= 2; ++comp) {
    double mean_q3 = 0.0, mean_q4 = 0.0;
    std::size_t n_q3 = 0, n_q4 = 0;
    for (const auto& h : res.convergence_history) {
      const double v = h[static_cast<std::size_t>(comp)];
      if (h[0] >= t_q4) {
        mean_q4 += v;
        ++n_q4;
      } else if (h[0] >= t_q3) {
        mean_q3 += v;
        ++n_q3;
      }
    }
    if (n_q3 == 0 || n_q4 == 0) continue;  // window too short to judge
    mean_q3 /= static_cast<double>(n_q3);
    mean_q4 /= static_cast<double>(n_q4);
    if (std::abs(mean_q4 - mean_q3) > 0.10 * scale) res.converged = false;
  }
  return res;
}

SpectrumResult power_spectrum(const std::vector<double>& series, double fs) {
  constexpr std::size_t kLen = 1024;  // FFT/segment length of the protocol
  constexpr std::size_t kMinSamples = 2000;
  if (series.size() < kMinSamples) {
    throw ValidationError("power_spectrum needs at least 2000 samples");
  }
  if (!(fs > 0.0)) throw ValidationError("sampling frequency must be positive");

  const std::size_t n = series.size();
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);

  // Periodic Hann window and its power normalization.
  std::vector<double> w(kLen);
  double U = 0.0;
  for (std::size_t i = 0; i < kLen; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(kLen));
    U += w[i] * w[i];
  }

  const std::size_t step = kLen / 2;  // 50% overlap
  const std::size_t n_seg = (n - kLen) / step + 1;

  SpectrumResult res{};
  res.fft_length = kLen;
  res.n_samples = n;
  res.fs = fs;
  res.freqs.resize(kLen / 2 + 1);
  res.power.assign(kLen / 2 + 1, 0.0);
  for (std::size_t k = 0; k <= kLen / 2; ++k) {
    res.freqs[k] = fs * static_cast<double>(k) / static_cast<double>(kLen);
  }

  std::vector<std::complex<double>> buf(kLen);
  for (std::size_t seg = 0; seg < n_seg; ++seg) {
    const std::size_t off = seg * step;
    for (std::size_t i = 0; i < kLen; ++i) {
      buf[i] = {(series[off + i] - mean) * w[i], 0.0};
    }
    fft(buf);
    for (std::size_t k = 0; k <= kLen / 2; ++k) {
      double p = std::norm(buf[k]) / (fs * U);
      if (k != 0 && k != kLen / 2) p *= 2.0;  // one-sided fold
      res.power[k] += p;
    }
  }
  for (double& p : res.power) p /= static_cast<double>(n_seg);
  return res;
}

CycleReport detect_limit_cycle(const Trajectory& traj, double transient) {
  if (traj.status != TrajectoryStatus::completed) {
    throw ValidationError("detect_limit_cycle requires a completed trajectory");
  }
  const double t_end = traj.t_end_requested;
  if (!(transient >= 0.0) || !(transient < t_end)) {
    throw ValidationError("transient must lie inside the trajectory duration");
  }

  constexpr double kDt = 0.1;  // sampling interval for peak timing
  std::vector<double> ts, xs, ys;
  for (double t = transient; t <= t_end + 1e-12; t += kDt) {
    const Vec s = dense_eval(traj, std::min(t, t_end));
    ts.push_back(t);
    xs.push_back(s[0]);
    ys.push_back(s[1]);
  }

  CycleReport rep{};
  rep.x_min = *std::min_element(xs.begin(), xs.end());
  rep.x_max = *std::max_element(xs.begin(), xs.end());
  rep.y_min = *std::min_element(ys.begin(), ys.end());
  rep.y_max = *std::max_element(ys.begin(), ys.end());
  rep.final_state = {xs.back(), ys.back()};
  rep.period = 0.0;

  const auto peaks = find_peaks(ts, xs);
  rep.n_peaks = peaks.size();

  // The range test comes first: a decaying focus settles into a residual
  // oscillation whose peaks are perfectly regular, so peak regularity alone
  // cannot distinguish it from a genuine cycle once the amplitude is tiny.
  if (rep.x_max - rep.x_min < 1e-5) {
    rep.kind = CycleKind::fixed_point;
    return rep;
  }

  if (peaks.size() >= 6) {
    std::vector<double> intervals, heights;
    for (std::size_t i = peaks.size() - 5; i < peaks.size(); ++i) {
      intervals.push_back(peaks[i].t - peaks[i - 1].t);
    }
    for (std::size_t i = peaks.size() - 6; i < peaks.size(); ++i) {
      heights.push_back(peaks[i].height);
    }
    double mean_T = 0.0;
    for (double v : intervals) mean_T += v;
    mean_T /= static_cast<double>(intervals.size());
    bool intervals_ok = mean_T > 0.0;
    for (double v : intervals) {
      if (std::abs(v - mean_T) > 0.01 * mean_T) intervals_ok = false;
    }
    double mean_h = 0.0;
    for (double v : heights) mean_h += v;
    mean_h /= static_cast<double>(heights.size());
    const double h_scale = std::max(std::abs(mean_h), 1e-12);
    bool heights_ok = true;
    for (double v : heights) {
      if (std::abs(v - mean_h) > 0.005 * h_scale) heights_ok = false;
    }
    if (intervals_ok && heights_ok) {
      rep.kind = CycleKind::limit_cycle;
      rep.period = mean_T;
      return rep;
    }
  }

  rep.kind = CycleKind::undecided;
  return rep;
}

SweepBranch bifurcation_sweep(const Params& base, const std::vector<double>& p_grid,
                              const State& s0, const SweepTimes& times, bool continuation,
                              int workers, const IntegratorConfig& cfg) {
  validate(base);
  if (p_grid.empty()) throw ValidationError("sweep grid must be nonempty");
  for (std::size_t i = 0; i < p_grid.size(); ++i) {
    if (p_grid[i] < 0.0 || p_grid[i] > 1.0) {
      throw ValidationError("sweep grid values must lie in [0,1]");
    }
    if (i > 0 && p_grid[i] <= p_grid[i - 1]) {
      throw ValidationError("sweep grid must be strictly ascending");
    }
  }
  if (!(times.transient > 0.0) || !(times.window > 0.0)) {
    throw ValidationError("sweep transient and window must be positive");
  }
  if (workers < 1) throw ValidationError("workers must be >= 1");
  if (continuation && workers > 1) {
    throw ValidationError("continuation seeding is sequential; use cold-start for workers > 1");
  }

  const std::size_t n = p_grid.size();
  std::vector<SweepEntry> entries(n);

  if (continuation || workers == 1) {
    State seed = s0;
    for (std::size_t i = 0; i < n; ++i) {
      Params params = base;
      params.p = p_grid[i];
      entries[i] = sweep_one(params, continuation ? seed : s0, times, cfg);
      if (continuation) {
        // Reseed after a blow-up; otherwise walk the attractor branch.
        seed = entries[i].completed ? entries[i].final_state : s0;
        if (!(seed.x > 0.0) || !(seed.y > 0.0)) seed = s0;
      }
    }
  } else {
    std::vector<std::thread> pool;
    std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    for (std::size_t w = 0; w < n_workers; ++w) {
      pool.emplace_back([&, w]() {
        for (std::size_t i = w; i < n; i += n_workers) {
          Params params = base;
          params.p = p_grid[i];
          entries[i] = sweep_one(params, s0, times, cfg);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  SweepBranch branch;
  branch.p_values = p_grid;
  branch.attractor_min_x.reserve(n);
  branch.attractor_max_x.reserve(n);
  branch.regime.reserve(n);
  for (const auto& entry : entries) {
    branch.attractor_min_x.push_back(entry.min_x);
    branch.attractor_max_x.push_back(entry.max_x);
    branch.regime.push_back(entry.regime);
  }
  return branch;
}

}  // namespace hvlab
