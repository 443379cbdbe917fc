// Command-line front end: experiment configuration, dispatch, and artifact
// output (JSON reports, CSV data, gnuplot scripts).
//
// A single JSON config drives every subcommand.  Top level:
//
//   {
//     "params":             {"m":…, "c":…, "d":…, "e":…, "a":…, "p":…},
//       — or —
//     "dimensional_params": {"R":…, "K":…, "M":…, "C":…, "D":…, "E":…, "A":…, "p":…},
//     "integrator":         {"rel_tol":…, "abs_tol":…, "h_init":…, "h_min":…,
//                            "h_max":…, "blow_up_threshold":…},        (optional)
//     "out_dir":            "results",                                  (optional)
//     "seed":               42,                                         (optional)
//     "simulate"|"global"|"sweep"|"lyapunov"|"spectrum"|"control": {…}  (per command)
//   }
//
// Exactly one of "params"/"dimensional_params" must be present; unknown keys
// anywhere are rejected.  Every block present is validated before dispatch,
// whether or not the chosen command consumes it.
//
// Exit codes: 0 success, 1 unknown command / usage, 2 validation error
// (including unwritable output), 3 numerical failure (blow-up, step
// underflow, non-convergence).
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hvlab/integrator.hpp"
#include "hvlab/model.hpp"

namespace hvlab {

/// Settings for `simulate`: initial state and uniform sampling of the
/// resulting trajectory.  When `xi0` is set a "control" block must be present
/// and the controlled three-species system is integrated instead.
struct SimulateConfig {
  double x0 = 0.0;
  double y0 = 0.0;
  double t_end = 500.0;
  double dt = 0.5;
  std::optional<double> xi0;
};

/// Settings for `global`: convergence runs from the canned initial conditions
/// (ring of radius 0.3 around the equilibrium plus two corners), optionally
/// extended by seeded random initial conditions.
struct GlobalConfig {
  double t_end = 1000.0;
  double dt = 1.0;
  int extra_random_ics = 0;
};

/// Settings for `sweep`: grid over the group-defence exponent p.
struct SweepConfig {
  double p_min = 0.0;
  double p_max = 1.0;
  double p_step = 0.01;
  double transient = 6000.0;
  double window = 400.0;
  double x0 = 0.8;
  double y0 = 0.4;
  bool continuation = true;
};

/// Settings for `lyapunov`: Benettin run length and initial state.
struct LyapunovConfig {
  double x0 = 0.0;
  double y0 = 0.0;
  double total_time = 2000.0;
  double transient = 200.0;
};

/// Settings for `spectrum`: sampling protocol for the Welch estimate
/// (defaults follow the fs = 1 Hz / 1000-sample discard / 2000-sample
/// window / 1024-point FFT recipe).
struct SpectrumConfig {
  double x0 = 0.0;
  double y0 = 0.0;
  double t_end = 3000.0;
  double dt = 1.0;
  int discard_samples = 1000;
  int n_samples = 2000;
  std::string component = "x";
};

/// Settings for `control`: feedback gains plus the trajectory window used for
/// the controlled-run CSV.  Initial state defaults to the controlled
/// equilibrium displaced by +5% in every coordinate.
struct ControlConfig {
  ControlParams gains{};
  std::optional<double> x0;
  std::optional<double> y0;
  std::optional<double> xi0;
  double t_end = 500.0;
  double dt = 0.5;
};

/// Fully parsed and validated experiment configuration.
struct ExperimentConfig {
  Params params{};
  bool from_dimensional = false;
  DimensionalParams dimensional{};
  IntegratorConfig integrator{};
  std::string out_dir;  // empty = not specified
  std::uint64_t seed = 0;

  std::optional<SimulateConfig> simulate;
  std::optional<GlobalConfig> global;
  std::optional<SweepConfig> sweep;
  std::optional<LyapunovConfig> lyapunov;
  std::optional<SpectrumConfig> spectrum;
  std::optional<ControlConfig> control;
};

/// Command-line flags shared by all subcommands.
struct CliOptions {
  std::string config_path;  // empty only for `reproduce`
  std::string out_dir;      // --out override; empty = not given
  bool plot = false;
  int workers = 1;
  std::optional<std::uint64_t> seed;  // --seed override
};

/// Parses and validates a JSON config file.  Throws ValidationError on
/// malformed JSON, unknown keys, missing fields, or precondition violations.
ExperimentConfig load_config(const std::string& path);

/// The ten canned initial conditions used by the convergence figure and the
/// `global` subcommand: eight points on a ring of radius 0.3 around the
/// interior equilibrium (clipped into the positive quadrant at 1e-3) plus the
/// corners (0.1, 0.1) and (0.9, 0.9).
std::vector<State> canned_initial_conditions(const Params& params);

/// Runs one subcommand end to end and returns the process exit code.
/// Recognized commands: equilibrium, simulate, bounds, global, hopf, sweep,
/// lyapunov, spectrum, control, reproduce.  Unknown commands return 1.
int run(const std::string& command, const CliOptions& opts);

/// Runs the six canned figure configurations into `output_dir`, writing data
/// files, gnuplot scripts, and a manifest.json with one entry per figure.
/// Individual figure failures are recorded in the manifest and reflected in a
/// nonzero return code; remaining figures still run.
int reproduce_figures(const std::string& output_dir);

}  // namespace hvlab
