// Trajectory-level analyses: Lyapunov exponents via the tangent-space QR
// (Benettin) method, Welch power spectra at the fixed 1 Hz / 1024-point FFT
// protocol, limit-cycle detection by peak timing, and bifurcation sweeps in
// the group-behaviour exponent p.
//
// The Lyapunov computation integrates the plant jointly with its variational
// equation dPhi/dt = J(x(t), y(t)) Phi and re-orthonormalizes the tangent
// frame every time unit; the exponents are the time-averaged logarithmic
// stretch factors after a transient.  For this 2-D flow the useful checks are
// sign patterns (both negative at a stable point; one near zero on a cycle)
// and the divergence identity lambda1 + lambda2 = time-average trace J.

#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "hvlab/equilibrium.hpp"
#include "hvlab/integrator.hpp"
#include "hvlab/model.hpp"

namespace hvlab {

/// Lyapunov exponents with their convergence record.
struct LyapunovResult {
  double lambda1;             ///< largest exponent (1/time)
  double lambda2;             ///< smallest exponent
  double transient_discarded; ///< time dropped before averaging
  double total_time;          ///< full integration span
  bool converged;             ///< false when the quarter-averaged estimates still
                              ///< shift by > 10% of the exponent scale at the end
  /// Running estimates (t, lambda1(t), lambda2(t)) at each renormalization
  /// after the transient.
  std::vector<std::array<double, 3>> convergence_history;
};

/// One-sided Welch power spectral density.
struct SpectrumResult {
  std::vector<double> freqs;  ///< bin centers, k * fs / fft_length, k = 0..fft_length/2
  std::vector<double> power;  ///< nonnegative density values per bin
  std::size_t fft_length;     ///< segment/FFT length (1024)
  std::size_t n_samples;      ///< input series length
  double fs;                  ///< sampling frequency (Hz)
};

/// What detect_limit_cycle concluded.
enum class CycleKind { fixed_point, limit_cycle, undecided };

/// Attractor summary from peak timing of x(t).
struct CycleReport {
  CycleKind kind;
  double period;       ///< mean of the last 5 inter-peak intervals (cycles only)
  double x_min, x_max; ///< post-transient extrema of x
  double y_min, y_max; ///< post-transient extrema of y
  std::size_t n_peaks; ///< peaks found after the transient
  State final_state;   ///< last sampled state
};

/// Per-p attractor regime for the sweep.
enum class Regime { fixed_point, limit_cycle, blow_up };

/// Render a regime tag ("fixed-point", "limit-cycle", "blow-up").
std::string to_string(Regime r);

/// Bifurcation-diagram branch over a p grid.
struct SweepBranch {
  std::vector<double> p_values;
  std::vector<double> attractor_min_x;
  std::vector<double> attractor_max_x;
  std::vector<Regime> regime;
};

/// Transient/measurement split for sweep entries.
struct SweepTimes {
  double transient;  ///< settle time discarded before extrema
  double window;     ///< measurement window after the transient
};

/// Lyapunov exponents of the plant from s0 over total_time with the given
/// transient, renormalizing every 1 time unit.  Throws NumericalError when
/// the underlying trajectory blows up or underflows.  A drifting estimate is
/// reported via converged = false, not an exception.
LyapunovResult lyapunov_exponents(const Params& params, const State& s0, double total_time,
                                  double transient,
                                  const IntegratorConfig& base = IntegratorConfig{});

/// Mean-removed Welch PSD: segment length 1024, 50% overlap, periodic Hann
/// window, one-sided density normalization (total power * bin width matches
/// the series variance).  Requires at least 2000 samples; fs defaults to the
/// protocol's 1 Hz.
SpectrumResult power_spectrum(const std::vector<double>& series, double fs = 1.0);

/// Classifies the post-transient attractor of a completed plant trajectory.
/// Samples the dense output at dt = 0.1, finds maxima of x(t) with 3-point
/// quadratic refinement, and reports:
///   fixed-point  when the post-transient x-range is below 1e-5 (checked
///                first: a settled focus still shows perfectly regular
///                residual peaks, so regularity alone cannot exclude it);
///   limit-cycle  when the last 5 inter-peak intervals agree within 1% and
///                the last 6 peak heights within 0.5%;
///   undecided    otherwise (e.g. transient too short).
CycleReport detect_limit_cycle(const Trajectory& traj, double transient);

/// Sweeps p over the supplied ascending grid, integrating each entry for
/// times.transient + times.window and recording post-transient x extrema and
/// the regime tag.  Undecided detections are resolved by the peak-envelope
/// trend (contracting peaks -> fixed-point, otherwise limit-cycle; the call
/// never returns an undecided tag).  Blow-up entries keep the extrema of
/// whatever window was stored before the stop and reseed the next entry.
///
/// continuation = true (default) seeds every run from the previous entry's
/// final state (sequential); continuation = false cold-starts every entry
/// from s0 and may run on `workers` threads, results merged in grid order.
/// Requesting workers > 1 with continuation is a validation error.
SweepBranch bifurcation_sweep(const Params& base, const std::vector<double>& p_grid,
                              const State& s0, const SweepTimes& times, bool continuation = true,
                              int workers = 1,
                              const IntegratorConfig& cfg = IntegratorConfig{});

}  // namespace hvlab
