#include "hvlab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hvlab/analysis.hpp"
#include "hvlab/control.hpp"
#include "hvlab/equilibrium.hpp"
#include "hvlab/errors.hpp"
#include "hvlab/io.hpp"

namespace hvlab {

namespace {

namespace fs = std::filesystem;
using io::fmt;
using io::ordered_json;

// ---------------------------------------------------------------------------
// Field adapters and output-path helpers
// ---------------------------------------------------------------------------

Field plant_field(const Params& pr) {
  return [pr](double, const Vec& s) {
    const auto d = vector_field(pr, State{s[0], s[1]});
    return Vec{d[0], d[1]};
  };
}

Field controlled_field(const Params& pr, const ControlParams& cp) {
  const CharacteristicFn phi = [](double sigma) { return sigma; };
  return [pr, cp, phi](double, const Vec& s) {
    const auto d = extended_vector_field(pr, cp, ExtendedState{s[0], s[1], s[2]}, phi);
    return Vec{d[0], d[1], d[2]};
  };
}

std::string resolve_out_dir(const CliOptions& opts, const std::string& cfg_out) {
  if (!opts.out_dir.empty()) return opts.out_dir;
  if (!cfg_out.empty()) return cfg_out;
  if (const char* env = std::getenv("HVLAB_OUT"); env != nullptr && *env != '\0') return env;
  return ".";
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw ValidationError("output directory is not writable: " + dir);
  }
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

// ---------------------------------------------------------------------------
// JSON builders
// ---------------------------------------------------------------------------

ordered_json params_json(const Params& p) {
  return ordered_json{{"m", p.m}, {"c", p.c}, {"d", p.d}, {"e", p.e}, {"a", p.a}, {"p", p.p}};
}

ordered_json state_json(const State& s) { return ordered_json{{"x", s.x}, {"y", s.y}}; }

ordered_json extended_state_json(const ExtendedState& s) {
  return ordered_json{{"x", s.x}, {"y", s.y}, {"xi", s.xi}};
}

ordered_json stability_json(const StabilityReport& r) {
  ordered_json j;
  j["equilibrium"] = state_json(r.equilibrium);
  j["P1"] = r.P1;
  j["P2"] = r.P2;
  j["eigenvalues"] =
      ordered_json::array({io::complex_to_json(r.eigenvalues[0]), io::complex_to_json(r.eigenvalues[1])});
  j["classification"] = to_string(r.classification);
  j["hopf_eligible"] = r.hopf_eligible;
  return j;
}

// ---------------------------------------------------------------------------
// Trajectory runs and CSV rows
// ---------------------------------------------------------------------------

struct SampledRun {
  Trajectory traj;
  std::vector<Vec> samples;  // empty unless status == completed
};

SampledRun run_sampled(const Field& f, const Vec& s0, double t_end, double dt,
                       IntegratorConfig cfg, int positivity_dim) {
  cfg.t_end = t_end;
  cfg.positivity_dim = positivity_dim;
  SampledRun r{integrate(f, s0, cfg), {}};
  if (r.traj.status == TrajectoryStatus::completed) {
    r.samples = sample_uniform(r.traj, dt);
  }
  return r;
}

std::vector<std::vector<std::string>> sample_rows(const std::vector<Vec>& samples, double dt) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    std::vector<std::string> row;
    row.reserve(1 + samples[k].size());
    row.push_back(fmt(static_cast<double>(k) * dt));
    for (double v : samples[k]) row.push_back(fmt(v));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::vector<std::string>> raw_rows(const Trajectory& traj) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(traj.times.size());
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    std::vector<std::string> row;
    row.reserve(1 + traj.states[k].size());
    row.push_back(fmt(traj.times[k]));
    for (double v : traj.states[k]) row.push_back(fmt(v));
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Writes the trajectory CSV; on an incomplete run writes the raw accepted
/// states and throws NumericalError naming the stop reason.
void write_trajectory_or_throw(const SampledRun& run, const std::string& path,
                               const std::vector<std::string>& header, double dt,
                               const std::string& what) {
  if (run.traj.status == TrajectoryStatus::completed) {
    io::write_csv(path, header, sample_rows(run.samples, dt));
    return;
  }
  io::write_csv(path, header, raw_rows(run.traj));
  throw NumericalError(what + ": trajectory stopped with status " + to_string(run.traj.status) +
                       " at t = " + fmt(run.traj.times.back()));
}

// ---------------------------------------------------------------------------
// Gnuplot scripts (plain text, relative CSV paths, autoscale axes)
// ---------------------------------------------------------------------------

std::string gp_header() {
  return "# gnuplot script; run as: gnuplot -p <this file>\n"
         "set datafile separator ','\n";
}

void write_phase_plot(const std::string& path, const std::string& csv, const std::string& title) {
  std::ostringstream gp;
  gp << gp_header() << "set title '" << title << "'\n"
     << "set xlabel 'x (prey)'\nset ylabel 'y (predator)'\n"
     << "plot '" << csv << "' using 2:3 with lines notitle\n";
  io::write_text_file(path, gp.str());
}

void write_timeseries_plot(const std::string& path, const std::string& csv,
                           const std::string& title, bool has_xi) {
  std::ostringstream gp;
  gp << gp_header() << "set title '" << title << "'\n"
     << "set xlabel 't'\n"
     << "plot '" << csv << "' using 1:2 with lines title 'x', \\\n"
     << "     '" << csv << "' using 1:3 with lines title 'y'";
  if (has_xi) gp << ", \\\n     '" << csv << "' using 1:4 with lines title 'xi'";
  gp << "\n";
  io::write_text_file(path, gp.str());
}

// ---------------------------------------------------------------------------
// Parallel helper (per-index isolation, deterministic merge by index)
// ---------------------------------------------------------------------------

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body) {
  const int nw = std::max(1, std::min<int>(workers, static_cast<int>(n ? n : 1)));
  if (nw == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nw));
  for (int w = 0; w < nw; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = static_cast<std::size_t>(w); i < n; i += static_cast<std::size_t>(nw)) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
  }
}

// ---------------------------------------------------------------------------
// Subcommand implementations
// ---------------------------------------------------------------------------

void cmd_equilibrium(const ExperimentConfig& cfg, const std::string& dir, bool /*plot*/) {
  const StabilityReport rep = classify_local(cfg.params);
  ordered_json j;
  j["params"] = params_json(cfg.params);
  j.update(stability_json(rep));
  io::write_json_file(join(dir, "equilibrium.json"), j);
}

void cmd_simulate(const ExperimentConfig& cfg, const std::string& dir, bool plot) {
  if (!cfg.simulate) throw ValidationError("config has no \"simulate\" block");
  const SimulateConfig& sim = *cfg.simulate;
  const bool controlled = sim.xi0.has_value();

  SampledRun run{};
  std::vector<std::string> header;
  if (controlled) {
    run = run_sampled(controlled_field(cfg.params, cfg.control->gains),
                      Vec{sim.x0, sim.y0, *sim.xi0}, sim.t_end, sim.dt, cfg.integrator, 2);
    header = {"t", "x", "y", "xi"};
  } else {
    run = run_sampled(plant_field(cfg.params), Vec{sim.x0, sim.y0}, sim.t_end, sim.dt,
                      cfg.integrator, -1);
    header = {"t", "x", "y"};
  }
  const std::string csv = join(dir, "simulate.csv");
  if (plot) write_timeseries_plot(join(dir, "simulate.gp"), "simulate.csv", "simulate", controlled);
  write_trajectory_or_throw(run, csv, header, sim.dt, "simulate");
}

void cmd_bounds(const ExperimentConfig& cfg, const std::string& dir, bool /*plot*/) {
  const BoundsReport rep = check_boundedness(cfg.params);
  ordered_json j;
  j["params"] = params_json(cfg.params);
  j["M1"] = rep.M1;
  j["M2"] = rep.M2;
  j["m1x"] = rep.m1x;
  j["m2y"] = rep.m2y;
  j["mu"] = rep.mu;
  j["cond_mu"] = rep.cond_mu;
  j["cond_d"] = rep.cond_d;
  j["bounds_valid"] = rep.bounds_valid;
  io::write_json_file(join(dir, "bounds.json"), j);
}

void cmd_global(const ExperimentConfig& cfg, const std::string& dir, bool plot, int workers) {
  const GlobalConfig g = cfg.global.value_or(GlobalConfig{});
  const State eq = interior_equilibrium(cfg.params);
  const GlobalStabilityReport rep = check_global_stability(cfg.params);

  std::vector<State> ics = canned_initial_conditions(cfg.params);
  if (g.extra_random_ics > 0) {
    std::mt19937_64 rng(cfg.seed);
    const auto unit = [&rng] {
      return static_cast<double>(rng() >> 11) * 0x1.0p-53;  // uniform in [0,1)
    };
    for (int k = 0; k < g.extra_random_ics; ++k) {
      const double x = 0.05 + 1.1 * unit();
      const double y = 0.05 + 1.1 * unit();
      ics.push_back({x, y});
    }
  }

  const std::size_t n = ics.size();
  std::vector<SampledRun> runs(n);
  const Field f = plant_field(cfg.params);
  parallel_for(n, workers, [&](std::size_t i) {
    runs[i] = run_sampled(f, Vec{ics[i].x, ics[i].y}, g.t_end, g.dt, cfg.integrator, -1);
  });

  ordered_json j;
  j["params"] = params_json(cfg.params);
  j["equilibrium"] = state_json(eq);
  j["report"] = ordered_json{
      {"lhs1", rep.lhs1}, {"lhs2", rep.lhs2}, {"cond1", rep.cond1}, {"cond2", rep.cond2}};
  j["t_end"] = g.t_end;
  j["dt"] = g.dt;
  j["seed"] = cfg.seed;

  auto ic_list = ordered_json::array();
  auto statuses = ordered_json::array();
  auto distances = ordered_json::array();
  auto v_increase = ordered_json::array();
  auto converged = ordered_json::array();
  bool all_converged = true;
  bool any_failed = false;

  for (std::size_t i = 0; i < n; ++i) {
    const std::string csv_name = "global_ic" + std::to_string(i) + ".csv";
    ic_list.push_back(ordered_json::array({ics[i].x, ics[i].y}));
    statuses.push_back(to_string(runs[i].traj.status));
    if (runs[i].traj.status != TrajectoryStatus::completed) {
      any_failed = true;
      all_converged = false;
      io::write_csv(join(dir, csv_name), {"t", "x", "y"}, raw_rows(runs[i].traj));
      distances.push_back(nullptr);
      v_increase.push_back(nullptr);
      converged.push_back(false);
      continue;
    }
    io::write_csv(join(dir, csv_name), {"t", "x", "y"}, sample_rows(runs[i].samples, g.dt));
    const Vec& last = runs[i].samples.back();
    const double dist = std::hypot(last[0] - eq.x, last[1] - eq.y);
    distances.push_back(dist);
    // Largest increase of the energy function V between consecutive samples;
    // a negative value means V decreased monotonically at this resolution.
    double max_inc = -std::numeric_limits<double>::infinity();
    double prev_v = lyapunov_value(cfg.params, State{runs[i].samples[0][0], runs[i].samples[0][1]});
    for (std::size_t k = 1; k < runs[i].samples.size(); ++k) {
      const double v = lyapunov_value(cfg.params, State{runs[i].samples[k][0], runs[i].samples[k][1]});
      max_inc = std::max(max_inc, v - prev_v);
      prev_v = v;
    }
    v_increase.push_back(max_inc);
    const bool ok = dist < 1e-3;
    converged.push_back(ok);
    all_converged = all_converged && ok;
  }
  j["initial_conditions"] = ic_list;
  j["status"] = statuses;
  j["final_distances"] = distances;
  j["max_lyapunov_increase"] = v_increase;
  j["converged"] = converged;
  j["all_converged"] = all_converged;
  io::write_json_file(join(dir, "global.json"), j);

  if (plot) {
    std::ostringstream gp;
    gp << gp_header() << "set title 'convergence to the interior equilibrium'\n"
       << "set xlabel 'x (prey)'\nset ylabel 'y (predator)'\nplot ";
    for (std::size_t i = 0; i < n; ++i) {
      if (i) gp << ", \\\n     ";
      gp << "'global_ic" << i << ".csv' using 2:3 with lines notitle";
    }
    gp << "\n";
    io::write_text_file(join(dir, "global.gp"), gp.str());
  }

  if (any_failed) {
    throw NumericalError("global: at least one trajectory did not complete");
  }
}

void cmd_hopf(const ExperimentConfig& cfg, const std::string& dir, bool /*plot*/) {
  const HopfResult res = hopf_point(cfg.params);
  Params at = cfg.params;
  at.p = res.p1;
  const CharacteristicCoefficients cc = characteristic_coefficients(at);
  ordered_json j;
  j["params"] = params_json(cfg.params);
  j["p1"] = res.p1;
  j["roots"] = res.roots;
  j["g_at_0"] = res.g_at_0;
  j["g_at_1"] = res.g_at_1;
  j["P1_at_p1"] = cc.P1;
  j["P2_at_p1"] = cc.P2;
  j["hopf_eligible_at_p1"] = cc.P1 * cc.P1 < 4.0 * cc.P2;
  io::write_json_file(join(dir, "hopf.json"), j);
}

void cmd_sweep(const ExperimentConfig& cfg, const std::string& dir, bool plot, int workers) {
  if (!cfg.sweep) throw ValidationError("config has no \"sweep\" block");
  const SweepConfig& sw = *cfg.sweep;

  std::vector<double> grid;
  const auto count =
      static_cast<std::size_t>(std::floor((sw.p_max - sw.p_min) / sw.p_step + 1e-9)) + 1;
  grid.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    grid.push_back(sw.p_min + static_cast<double>(k) * sw.p_step);
  }

  const SweepBranch branch =
      bifurcation_sweep(cfg.params, grid, State{sw.x0, sw.y0}, SweepTimes{sw.transient, sw.window},
                        sw.continuation, workers, cfg.integrator);

  std::vector<std::vector<std::string>> rows;
  rows.reserve(branch.p_values.size());
  for (std::size_t i = 0; i < branch.p_values.size(); ++i) {
    rows.push_back({fmt(branch.p_values[i]), fmt(branch.attractor_min_x[i]),
                    fmt(branch.attractor_max_x[i]), to_string(branch.regime[i])});
  }
  io::write_csv(join(dir, "sweep.csv"), {"p", "min_x", "max_x", "regime"}, rows);

  if (plot) {
    std::ostringstream gp;
    gp << gp_header() << "set title 'attractor extrema vs p'\n"
       << "set xlabel 'p (group-behaviour exponent)'\nset ylabel 'x extrema'\n"
       << "plot 'sweep.csv' using 1:2 with lines title 'min x', \\\n"
       << "     'sweep.csv' using 1:3 with lines title 'max x'\n";
    io::write_text_file(join(dir, "sweep.gp"), gp.str());
  }
}

void cmd_lyapunov(const ExperimentConfig& cfg, const std::string& dir, bool plot) {
  if (!cfg.lyapunov) throw ValidationError("config has no \"lyapunov\" block");
  const LyapunovConfig& ly = *cfg.lyapunov;
  const LyapunovResult res = lyapunov_exponents(cfg.params, State{ly.x0, ly.y0}, ly.total_time,
                                                ly.transient, cfg.integrator);

  ordered_json j;
  j["params"] = params_json(cfg.params);
  j["initial_state"] = ordered_json{{"x", ly.x0}, {"y", ly.y0}};
  j["lambda1"] = res.lambda1;
  j["lambda2"] = res.lambda2;
  j["transient_discarded"] = res.transient_discarded;
  j["total_time"] = res.total_time;
  j["converged"] = res.converged;
  io::write_json_file(join(dir, "lyapunov.json"), j);

  std::vector<std::vector<std::string>> rows;
  rows.reserve(res.convergence_history.size());
  for (const auto& h : res.convergence_history) {
    rows.push_back({fmt(h[0]), fmt(h[1]), fmt(h[2])});
  }
  io::write_csv(join(dir, "lyapunov_history.csv"), {"t", "lambda1", "lambda2"}, rows);

  if (plot) {
    std::ostringstream gp;
    gp << gp_header() << "set title 'running Lyapunov-exponent estimates'\n"
       << "set xlabel 't'\nset ylabel 'exponent'\n"
       << "plot 'lyapunov_history.csv' using 1:2 with lines title 'lambda1', \\\n"
       << "     'lyapunov_history.csv' using 1:3 with lines title 'lambda2'\n";
    io::write_text_file(join(dir, "lyapunov.gp"), gp.str());
  }

  if (!res.converged) {
    throw NumericalError("lyapunov: running estimates did not settle (converged = false)");
  }
}

void cmd_spectrum(const ExperimentConfig& cfg, const std::string& dir, bool plot) {
  if (!cfg.spectrum) throw ValidationError("config has no \"spectrum\" block");
  const SpectrumConfig& sp = *cfg.spectrum;

  const SampledRun run = run_sampled(plant_field(cfg.params), Vec{sp.x0, sp.y0}, sp.t_end, sp.dt,
                                     cfg.integrator, -1);
  if (run.traj.status != TrajectoryStatus::completed) {
    throw NumericalError("spectrum: trajectory stopped with status " +
                         to_string(run.traj.status));
  }
  const std::size_t comp = (sp.component == "x") ? 0 : 1;
  std::vector<double> series;
  series.reserve(static_cast<std::size_t>(sp.n_samples));
  const auto begin = static_cast<std::size_t>(sp.discard_samples);
  for (std::size_t k = begin; k < begin + static_cast<std::size_t>(sp.n_samples); ++k) {
    series.push_back(run.samples.at(k)[comp]);
  }
  const SpectrumResult res = power_spectrum(series, 1.0 / sp.dt);

  std::vector<std::vector<std::string>> rows;
  rows.reserve(res.freqs.size());
  for (std::size_t i = 0; i < res.freqs.size(); ++i) {
    rows.push_back({fmt(res.freqs[i]), fmt(res.power[i])});
  }
  io::write_csv(join(dir, "spectrum.csv"), {"freq", "power"}, rows);

  if (plot) {
    std::ostringstream gp;
    gp << gp_header() << "set title 'Welch power spectral density'\n"
       << "set xlabel 'frequency'\nset ylabel 'power'\nset logscale y\n"
       << "plot 'spectrum.csv' using 1:2 with lines notitle\n";
    io::write_text_file(join(dir, "spectrum.gp"), gp.str());
  }
}

void cmd_control(const ExperimentConfig& cfg, const std::string& dir, bool plot) {
  if (!cfg.control) throw ValidationError("config has no \"control\" block");
  const ControlConfig& ctl = *cfg.control;

  const ControlledStabilityReport rep = classify_controlled(cfg.params, ctl.gains);
  ordered_json j;
  j["params"] = params_json(cfg.params);
  j["control"] = ordered_json{
      {"b", ctl.gains.b}, {"b1", ctl.gains.b1}, {"b2", ctl.gains.b2}, {"b3", ctl.gains.b3}};
  j["equilibrium"] = extended_state_json(rep.equilibrium);
  auto jac = ordered_json::array();
  for (const auto& row : rep.jacobian3) {
    jac.push_back(ordered_json::array({row[0], row[1], row[2]}));
  }
  j["jacobian"] = jac;
  j["eigenvalues"] = ordered_json::array({io::complex_to_json(rep.eigenvalues[0]),
                                          io::complex_to_json(rep.eigenvalues[1]),
                                          io::complex_to_json(rep.eigenvalues[2])});
  j["stable"] = rep.stable;
  io::write_json_file(join(dir, "control.json"), j);

  const double x0 = ctl.x0.value_or(1.05 * rep.equilibrium.x);
  const double y0 = ctl.y0.value_or(1.05 * rep.equilibrium.y);
  const double xi0 = ctl.xi0.value_or(1.05 * rep.equilibrium.xi);
  const SampledRun run = run_sampled(controlled_field(cfg.params, ctl.gains), Vec{x0, y0, xi0},
                                     ctl.t_end, ctl.dt, cfg.integrator, 2);
  if (plot) {
    write_timeseries_plot(join(dir, "control.gp"), "control_traj.csv", "controlled system", true);
  }
  write_trajectory_or_throw(run, join(dir, "control_traj.csv"), {"t", "x", "y", "xi"}, ctl.dt,
                            "control");
}

// ---------------------------------------------------------------------------
// Canned figure reproductions
// ---------------------------------------------------------------------------

// Parameter sets behind the six canned figures (m, c, d, e, a, p).
constexpr Params kStableSet{1.2, 0.3, 0.4, 0.25, 0.2, 0.7};
constexpr Params kCycleSet{1.2, 1.0, 0.7, 0.2, 0.2, 0.7};
constexpr Params kHopfBase{1.2, 0.25, 1.0, 0.45, 0.2, 0.5};
constexpr ControlParams kFigGainsOn{0.3, 0.3, 0.2, 0.7};
constexpr ControlParams kFigGainsOff{0.0, 0.3, 0.2, 0.7};

std::string cycle_kind_str(CycleKind k) {
  switch (k) {
    case CycleKind::fixed_point: return "fixed-point";
    case CycleKind::limit_cycle: return "limit-cycle";
    default: return "undecided";
  }
}

/// Stable interior equilibrium: one trajectory spiralling into (x*, y*).
ordered_json fig1(const std::string& dir) {
  const StabilityReport rep = classify_local(kStableSet);
  const double dt = 0.5;
  const SampledRun run =
      run_sampled(plant_field(kStableSet), Vec{0.5, 0.5}, 500.0, dt, IntegratorConfig{}, -1);
  write_phase_plot(join(dir, "fig1.gp"), "fig1_trajectory.csv", "stable interior equilibrium");
  write_trajectory_or_throw(run, join(dir, "fig1_trajectory.csv"), {"t", "x", "y"}, dt, "fig1");
  const Vec& last = run.samples.back();
  ordered_json j;
  j["status"] = "ok";
  j["params"] = params_json(kStableSet);
  j["classification"] = to_string(rep.classification);
  j["equilibrium"] = state_json(rep.equilibrium);
  j["final_distance"] = std::hypot(last[0] - rep.equilibrium.x, last[1] - rep.equilibrium.y);
  j["files"] = ordered_json::array({"fig1_trajectory.csv", "fig1.gp"});
  return j;
}

/// Stable limit cycle around an unstable equilibrium.
ordered_json fig2(const std::string& dir) {
  const StabilityReport rep = classify_local(kCycleSet);
  const double dt = 0.2;
  IntegratorConfig cfg{};
  cfg.t_end = 600.0;
  const Trajectory traj = integrate(plant_field(kCycleSet), Vec{0.5, 0.5}, cfg);
  if (traj.status != TrajectoryStatus::completed) {
    throw NumericalError("fig2: trajectory stopped with status " + to_string(traj.status));
  }
  io::write_csv(join(dir, "fig2_trajectory.csv"), {"t", "x", "y"},
                sample_rows(sample_uniform(traj, dt), dt));
  write_phase_plot(join(dir, "fig2.gp"), "fig2_trajectory.csv",
                   "limit cycle around an unstable equilibrium");
  const CycleReport cyc = detect_limit_cycle(traj, 300.0);
  ordered_json j;
  j["status"] = "ok";
  j["params"] = params_json(kCycleSet);
  j["classification"] = to_string(rep.classification);
  j["regime"] = cycle_kind_str(cyc.kind);
  j["period"] = cyc.period;
  j["x_range"] = ordered_json::array({cyc.x_min, cyc.x_max});
  j["y_range"] = ordered_json::array({cyc.y_min, cyc.y_max});
  j["files"] = ordered_json::array({"fig2_trajectory.csv", "fig2.gp"});
  return j;
}

/// Lyapunov-exponent pairs for the stable and cyclic parameter sets.
ordered_json fig3(const std::string& dir) {
  ordered_json j;
  j["status"] = "ok";
  const struct {
    const char* key;
    const char* csv;
    Params params;
  } cases[] = {
      {"stable", "fig3_stable_history.csv", kStableSet},
      {"cycle", "fig3_cycle_history.csv", kCycleSet},
  };
  for (const auto& cs : cases) {
    const LyapunovResult res = lyapunov_exponents(cs.params, State{0.5, 0.5}, 2000.0, 200.0);
    std::vector<std::vector<std::string>> rows;
    rows.reserve(res.convergence_history.size());
    for (const auto& h : res.convergence_history) {
      rows.push_back({fmt(h[0]), fmt(h[1]), fmt(h[2])});
    }
    io::write_csv(join(dir, cs.csv), {"t", "lambda1", "lambda2"}, rows);
    j[cs.key] = ordered_json{
        {"lambda1", res.lambda1}, {"lambda2", res.lambda2}, {"converged", res.converged}};
  }
  std::ostringstream gp;
  gp << gp_header() << "set title 'running Lyapunov-exponent estimates'\n"
     << "set xlabel 't'\nset ylabel 'exponent'\n"
     << "plot 'fig3_stable_history.csv' using 1:2 with lines title 'stable l1', \\\n"
     << "     'fig3_stable_history.csv' using 1:3 with lines title 'stable l2', \\\n"
     << "     'fig3_cycle_history.csv' using 1:2 with lines title 'cycle l1', \\\n"
     << "     'fig3_cycle_history.csv' using 1:3 with lines title 'cycle l2'\n";
  io::write_text_file(join(dir, "fig3.gp"), gp.str());
  j["files"] = ordered_json::array(
      {"fig3_stable_history.csv", "fig3_cycle_history.csv", "fig3.gp"});
  return j;
}

/// Convergence from the ten canned initial conditions (global stability
/// behaviour; the printed sufficient conditions are reported as evaluated).
ordered_json fig4(const std::string& dir) {
  const State eq = interior_equilibrium(kStableSet);
  const GlobalStabilityReport rep = check_global_stability(kStableSet);
  const std::vector<State> ics = canned_initial_conditions(kStableSet);
  const double dt = 1.0;
  const Field f = plant_field(kStableSet);

  double max_dist = 0.0;
  auto files = ordered_json::array();
  for (std::size_t i = 0; i < ics.size(); ++i) {
    const SampledRun run = run_sampled(f, Vec{ics[i].x, ics[i].y}, 1000.0, dt, IntegratorConfig{}, -1);
    const std::string csv = "fig4_ic" + std::to_string(i) + ".csv";
    write_trajectory_or_throw(run, join(dir, csv), {"t", "x", "y"}, dt, "fig4");
    const Vec& last = run.samples.back();
    max_dist = std::max(max_dist, std::hypot(last[0] - eq.x, last[1] - eq.y));
    files.push_back(csv);
  }
  std::ostringstream gp;
  gp << gp_header() << "set title 'trajectories from ten initial conditions'\n"
     << "set xlabel 'x (prey)'\nset ylabel 'y (predator)'\nplot ";
  for (std::size_t i = 0; i < ics.size(); ++i) {
    if (i) gp << ", \\\n     ";
    gp << "'fig4_ic" << i << ".csv' using 2:3 with lines notitle";
  }
  gp << "\n";
  io::write_text_file(join(dir, "fig4.gp"), gp.str());
  files.push_back("fig4.gp");

  ordered_json j;
  j["status"] = "ok";
  j["params"] = params_json(kStableSet);
  j["report"] = ordered_json{
      {"lhs1", rep.lhs1}, {"lhs2", rep.lhs2}, {"cond1", rep.cond1}, {"cond2", rep.cond2}};
  j["max_final_distance"] = max_dist;
  j["all_converged"] = max_dist < 1e-3;
  j["files"] = files;
  return j;
}

/// Hopf scenario: phase portraits either side of p1 plus the sweep branch.
ordered_json fig5(const std::string& dir) {
  const HopfResult hopf = hopf_point(kHopfBase);

  const double dt = 0.2;
  Params below = kHopfBase;
  below.p = 0.3;
  const SampledRun run_a =
      run_sampled(plant_field(below), Vec{0.5, 0.5}, 500.0, dt, IntegratorConfig{}, -1);
  write_phase_plot(join(dir, "fig5a.gp"), "fig5a_trajectory.csv", "below the Hopf point (p = 0.3)");
  write_trajectory_or_throw(run_a, join(dir, "fig5a_trajectory.csv"), {"t", "x", "y"}, dt, "fig5a");

  Params above = kHopfBase;
  above.p = 0.7;
  const SampledRun run_b =
      run_sampled(plant_field(above), Vec{0.5, 0.5}, 600.0, dt, IntegratorConfig{}, -1);
  write_phase_plot(join(dir, "fig5b.gp"), "fig5b_trajectory.csv", "above the Hopf point (p = 0.7)");
  write_trajectory_or_throw(run_b, join(dir, "fig5b_trajectory.csv"), {"t", "x", "y"}, dt, "fig5b");

  std::vector<double> grid;
  for (int k = 0; k <= 40; ++k) grid.push_back(0.3 + 0.01 * k);
  const SweepBranch branch = bifurcation_sweep(kHopfBase, grid, State{0.8, 0.4},
                                               SweepTimes{6000.0, 400.0});
  std::vector<std::vector<std::string>> rows;
  rows.reserve(branch.p_values.size());
  double transition_p = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < branch.p_values.size(); ++i) {
    if (std::isnan(transition_p) && branch.regime[i] == Regime::limit_cycle) {
      transition_p = branch.p_values[i];
    }
    rows.push_back({fmt(branch.p_values[i]), fmt(branch.attractor_min_x[i]),
                    fmt(branch.attractor_max_x[i]), to_string(branch.regime[i])});
  }
  io::write_csv(join(dir, "fig5c_sweep.csv"), {"p", "min_x", "max_x", "regime"}, rows);
  std::ostringstream gp;
  gp << gp_header() << "set title 'bifurcation diagram in p'\n"
     << "set xlabel 'p (group-behaviour exponent)'\nset ylabel 'x extrema'\n"
     << "plot 'fig5c_sweep.csv' using 1:2 with lines title 'min x', \\\n"
     << "     'fig5c_sweep.csv' using 1:3 with lines title 'max x'\n";
  io::write_text_file(join(dir, "fig5c.gp"), gp.str());

  ordered_json j;
  j["status"] = "ok";
  j["params"] = params_json(kHopfBase);
  j["p1"] = hopf.p1;
  j["transition_p"] = transition_p;
  j["within_one_step"] = std::isfinite(transition_p) && std::abs(transition_p - hopf.p1) <= 0.01 + 1e-9;
  j["files"] = ordered_json::array({"fig5a_trajectory.csv", "fig5b_trajectory.csv",
                                    "fig5c_sweep.csv", "fig5a.gp", "fig5b.gp", "fig5c.gp"});
  return j;
}

/// Indirect control off/on at the cyclic parameter set.
ordered_json fig6(const std::string& dir) {
  ordered_json j;
  j["status"] = "ok";
  const double dt = 0.5;
  const struct {
    const char* key;
    const char* csv;
    ControlParams gains;
  } cases[] = {
      {"off", "fig6_off_traj.csv", kFigGainsOff},
      {"on", "fig6_on_traj.csv", kFigGainsOn},
  };
  for (const auto& cs : cases) {
    const ControlledStabilityReport rep = classify_controlled(kCycleSet, cs.gains);
    double max_re = rep.eigenvalues[0].real();
    for (const auto& ev : rep.eigenvalues) max_re = std::max(max_re, ev.real());
    const Vec s0{1.05 * rep.equilibrium.x, 1.05 * rep.equilibrium.y, 1.05 * rep.equilibrium.xi};
    const SampledRun run =
        run_sampled(controlled_field(kCycleSet, cs.gains), s0, 500.0, dt, IntegratorConfig{}, 2);
    write_trajectory_or_throw(run, join(dir, cs.csv), {"t", "x", "y", "xi"}, dt, "fig6");
    j[cs.key] = ordered_json{{"stable", rep.stable},
                             {"max_real_part", max_re},
                             {"equilibrium", extended_state_json(rep.equilibrium)}};
  }
  std::ostringstream gp;
  gp << gp_header() << "set title 'indirect control off vs on'\n"
     << "set xlabel 't'\nset ylabel 'x (prey)'\n"
     << "plot 'fig6_off_traj.csv' using 1:2 with lines title 'x, b = 0', \\\n"
     << "     'fig6_on_traj.csv' using 1:2 with lines title 'x, b = 0.3'\n";
  io::write_text_file(join(dir, "fig6.gp"), gp.str());
  j["files"] = ordered_json::array({"fig6_off_traj.csv", "fig6_on_traj.csv", "fig6.gp"});
  return j;
}

}  // namespace

std::vector<State> canned_initial_conditions(const Params& params) {
  const State eq = interior_equilibrium(params);
  std::vector<State> ics;
  ics.reserve(10);
  const double r = 0.3;
  for (int k = 0; k < 8; ++k) {
    const double th = static_cast<double>(k) * (std::numbers::pi / 4.0);
    ics.push_back({std::max(eq.x + r * std::cos(th), 1e-3),
                   std::max(eq.y + r * std::sin(th), 1e-3)});
  }
  ics.push_back({0.1, 0.1});
  ics.push_back({0.9, 0.9});
  return ics;
}

int reproduce_figures(const std::string& output_dir) {
  ensure_dir(output_dir);
  ordered_json manifest;
  int exit_code = 0;
  const auto guard = [&](const char* key, const std::function<ordered_json(const std::string&)>& fn) {
    try {
      manifest[key] = fn(output_dir);
    } catch (const ValidationError& ex) {
      manifest[key] = ordered_json{{"status", "error"}, {"message", ex.what()}};
      exit_code = std::max(exit_code, 2);
    } catch (const std::exception& ex) {
      manifest[key] = ordered_json{{"status", "error"}, {"message", ex.what()}};
      exit_code = std::max(exit_code, 3);
    }
  };
  guard("fig1", fig1);
  guard("fig2", fig2);
  guard("fig3", fig3);
  guard("fig4", fig4);
  guard("fig5", fig5);
  guard("fig6", fig6);
  io::write_json_file(join(output_dir, "manifest.json"), manifest);
  return exit_code;
}

int run(const std::string& command, const CliOptions& opts) {
  try {
    if (command == "reproduce") {
      std::string cfg_out;
      if (!opts.config_path.empty()) {
        cfg_out = load_config(opts.config_path).out_dir;
      }
      return reproduce_figures(resolve_out_dir(opts, cfg_out));
    }

    if (opts.config_path.empty()) {
      std::cerr << "error: --config is required\n";
      return 1;
    }
    ExperimentConfig cfg = load_config(opts.config_path);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.workers < 1) throw ValidationError("--workers must be >= 1");
    const std::string dir = resolve_out_dir(opts, cfg.out_dir);
    ensure_dir(dir);

    if (command == "equilibrium") {
      cmd_equilibrium(cfg, dir, opts.plot);
    } else if (command == "simulate") {
      cmd_simulate(cfg, dir, opts.plot);
    } else if (command == "bounds") {
      cmd_bounds(cfg, dir, opts.plot);
    } else if (command == "global") {
      cmd_global(cfg, dir, opts.plot, opts.workers);
    } else if (command == "hopf") {
      cmd_hopf(cfg, dir, opts.plot);
    } else if (command == "sweep") {
      cmd_sweep(cfg, dir, opts.plot, opts.workers);
    } else if (command == "lyapunov") {
      cmd_lyapunov(cfg, dir, opts.plot);
    } else if (command == "spectrum") {
      cmd_spectrum(cfg, dir, opts.plot);
    } else if (command == "control") {
      cmd_control(cfg, dir, opts.plot);
    } else {
      std::cerr << "error: unknown command \"" << command << "\"\n";
      return 1;
    }
    return 0;
  } catch (const ValidationError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  } catch (const NumericalError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 3;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 3;
  }
}

}  // namespace hvlab
