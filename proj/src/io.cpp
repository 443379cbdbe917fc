#include "hvlab/io.hpp"

#include <charconv>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "hvlab/cli.hpp"
#include "hvlab/errors.hpp"

namespace hvlab::io {

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw ValidationError("cannot open output file for writing: " + path);
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) {
    throw ValidationError("write failed for output file: " + path);
  }
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream buf;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) buf << ',';
    buf << header[i];
  }
  buf << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) buf << ',';
      buf << row[i];
    }
    buf << '\n';
  }
  write_text_file(path, buf.str());
}

void write_json_file(const std::string& path, const ordered_json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

ordered_json complex_to_json(const std::complex<double>& z) {
  return ordered_json{{"re", z.real()}, {"im", z.imag()}};
}

}  // namespace hvlab::io

namespace hvlab {

namespace {

using io::ordered_json;
using json = nlohmann::json;

/// Throws unless every key of `obj` appears in `allowed`.
void reject_unknown_keys(const json& obj, const std::string& ctx,
                         std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ValidationError("unknown key \"" + item.key() + "\" in " + ctx);
    }
  }
}

const json& require_object(const json& obj, const std::string& ctx) {
  if (!obj.is_object()) {
    throw ValidationError(ctx + " must be a JSON object");
  }
  return obj;
}

double get_number(const json& obj, const std::string& ctx, const char* key) {
  if (!obj.contains(key)) {
    throw ValidationError("missing key \"" + std::string(key) + "\" in " + ctx);
  }
  const json& v = obj.at(key);
  if (!v.is_number()) {
    throw ValidationError("key \"" + std::string(key) + "\" in " + ctx + " must be a number");
  }
  return v.get<double>();
}

double get_number_or(const json& obj, const std::string& ctx, const char* key, double fallback) {
  return obj.contains(key) ? get_number(obj, ctx, key) : fallback;
}

bool get_bool_or(const json& obj, const std::string& ctx, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) {
    throw ValidationError("key \"" + std::string(key) + "\" in " + ctx + " must be a boolean");
  }
  return v.get<bool>();
}

int get_int_or(const json& obj, const std::string& ctx, const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) {
    throw ValidationError("key \"" + std::string(key) + "\" in " + ctx + " must be an integer");
  }
  return v.get<int>();
}

Params parse_params(const json& obj) {
  require_object(obj, "\"params\"");
  reject_unknown_keys(obj, "\"params\"", {"m", "c", "d", "e", "a", "p"});
  Params p{};
  p.m = get_number(obj, "\"params\"", "m");
  p.c = get_number(obj, "\"params\"", "c");
  p.d = get_number(obj, "\"params\"", "d");
  p.e = get_number(obj, "\"params\"", "e");
  p.a = get_number(obj, "\"params\"", "a");
  p.p = get_number(obj, "\"params\"", "p");
  validate(p);
  return p;
}

DimensionalParams parse_dimensional(const json& obj) {
  require_object(obj, "\"dimensional_params\"");
  reject_unknown_keys(obj, "\"dimensional_params\"", {"R", "K", "M", "C", "D", "E", "A", "p"});
  DimensionalParams d{};
  d.R = get_number(obj, "\"dimensional_params\"", "R");
  d.K = get_number(obj, "\"dimensional_params\"", "K");
  d.M = get_number(obj, "\"dimensional_params\"", "M");
  d.C = get_number(obj, "\"dimensional_params\"", "C");
  d.D = get_number(obj, "\"dimensional_params\"", "D");
  d.E = get_number(obj, "\"dimensional_params\"", "E");
  d.A = get_number(obj, "\"dimensional_params\"", "A");
  d.p = get_number(obj, "\"dimensional_params\"", "p");
  validate(d);
  return d;
}

IntegratorConfig parse_integrator(const json& obj) {
  require_object(obj, "\"integrator\"");
  reject_unknown_keys(obj, "\"integrator\"",
                      {"rel_tol", "abs_tol", "h_init", "h_min", "h_max", "blow_up_threshold"});
  IntegratorConfig cfg{};
  cfg.rel_tol = get_number_or(obj, "\"integrator\"", "rel_tol", cfg.rel_tol);
  cfg.abs_tol = get_number_or(obj, "\"integrator\"", "abs_tol", cfg.abs_tol);
  cfg.h_init = get_number_or(obj, "\"integrator\"", "h_init", cfg.h_init);
  cfg.h_min = get_number_or(obj, "\"integrator\"", "h_min", cfg.h_min);
  cfg.h_max = get_number_or(obj, "\"integrator\"", "h_max", cfg.h_max);
  cfg.blow_up_threshold =
      get_number_or(obj, "\"integrator\"", "blow_up_threshold", cfg.blow_up_threshold);
  validate(cfg);
  return cfg;
}

SimulateConfig parse_simulate(const json& obj) {
  require_object(obj, "\"simulate\"");
  reject_unknown_keys(obj, "\"simulate\"", {"x0", "y0", "t_end", "dt", "xi0"});
  SimulateConfig s{};
  s.x0 = get_number(obj, "\"simulate\"", "x0");
  s.y0 = get_number(obj, "\"simulate\"", "y0");
  s.t_end = get_number_or(obj, "\"simulate\"", "t_end", s.t_end);
  s.dt = get_number_or(obj, "\"simulate\"", "dt", s.dt);
  if (obj.contains("xi0")) s.xi0 = get_number(obj, "\"simulate\"", "xi0");
  if (!(s.x0 > 0.0) || !(s.y0 > 0.0)) {
    throw ValidationError("\"simulate\": initial state must be positive");
  }
  if (s.t_end < 0.0 || !(s.dt > 0.0)) {
    throw ValidationError("\"simulate\": t_end must be >= 0 and dt > 0");
  }
  return s;
}

GlobalConfig parse_global(const json& obj) {
  require_object(obj, "\"global\"");
  reject_unknown_keys(obj, "\"global\"", {"t_end", "dt", "extra_random_ics"});
  GlobalConfig g{};
  g.t_end = get_number_or(obj, "\"global\"", "t_end", g.t_end);
  g.dt = get_number_or(obj, "\"global\"", "dt", g.dt);
  g.extra_random_ics = get_int_or(obj, "\"global\"", "extra_random_ics", g.extra_random_ics);
  if (!(g.t_end > 0.0) || !(g.dt > 0.0)) {
    throw ValidationError("\"global\": t_end and dt must be positive");
  }
  if (g.extra_random_ics < 0) {
    throw ValidationError("\"global\": extra_random_ics must be >= 0");
  }
  return g;
}

SweepConfig parse_sweep(const json& obj) {
  require_object(obj, "\"sweep\"");
  reject_unknown_keys(
      obj, "\"sweep\"",
      {"p_min", "p_max", "p_step", "transient", "window", "x0", "y0", "continuation"});
  SweepConfig s{};
  s.p_min = get_number(obj, "\"sweep\"", "p_min");
  s.p_max = get_number(obj, "\"sweep\"", "p_max");
  s.p_step = get_number(obj, "\"sweep\"", "p_step");
  s.transient = get_number_or(obj, "\"sweep\"", "transient", s.transient);
  s.window = get_number_or(obj, "\"sweep\"", "window", s.window);
  s.x0 = get_number_or(obj, "\"sweep\"", "x0", s.x0);
  s.y0 = get_number_or(obj, "\"sweep\"", "y0", s.y0);
  s.continuation = get_bool_or(obj, "\"sweep\"", "continuation", s.continuation);
  if (!(s.p_step > 0.0) || s.p_min > s.p_max || s.p_min < 0.0 || s.p_max > 1.0) {
    throw ValidationError("\"sweep\": need 0 <= p_min <= p_max <= 1 and p_step > 0");
  }
  if (!(s.transient > 0.0) || !(s.window > 0.0)) {
    throw ValidationError("\"sweep\": transient and window must be positive");
  }
  if (!(s.x0 > 0.0) || !(s.y0 > 0.0)) {
    throw ValidationError("\"sweep\": initial state must be positive");
  }
  return s;
}

LyapunovConfig parse_lyapunov(const json& obj) {
  require_object(obj, "\"lyapunov\"");
  reject_unknown_keys(obj, "\"lyapunov\"", {"x0", "y0", "total_time", "transient"});
  LyapunovConfig l{};
  l.x0 = get_number(obj, "\"lyapunov\"", "x0");
  l.y0 = get_number(obj, "\"lyapunov\"", "y0");
  l.total_time = get_number_or(obj, "\"lyapunov\"", "total_time", l.total_time);
  l.transient = get_number_or(obj, "\"lyapunov\"", "transient", l.transient);
  if (!(l.x0 > 0.0) || !(l.y0 > 0.0)) {
    throw ValidationError("\"lyapunov\": initial state must be positive");
  }
  if (!(l.total_time > 0.0) || l.transient < 0.0 || l.transient >= l.total_time) {
    throw ValidationError("\"lyapunov\": need total_time > 0 and 0 <= transient < total_time");
  }
  return l;
}

SpectrumConfig parse_spectrum(const json& obj) {
  require_object(obj, "\"spectrum\"");
  reject_unknown_keys(obj, "\"spectrum\"",
                      {"x0", "y0", "t_end", "dt", "discard_samples", "n_samples", "component"});
  SpectrumConfig s{};
  s.x0 = get_number(obj, "\"spectrum\"", "x0");
  s.y0 = get_number(obj, "\"spectrum\"", "y0");
  s.t_end = get_number_or(obj, "\"spectrum\"", "t_end", s.t_end);
  s.dt = get_number_or(obj, "\"spectrum\"", "dt", s.dt);
  s.discard_samples = get_int_or(obj, "\"spectrum\"", "discard_samples", s.discard_samples);
  s.n_samples = get_int_or(obj, "\"spectrum\"", "n_samples", s.n_samples);
  if (obj.contains("component")) {
    const json& v = obj.at("component");
    if (!v.is_string()) throw ValidationError("\"spectrum\": component must be a string");
    s.component = v.get<std::string>();
  }
  if (s.component != "x" && s.component != "y") {
    throw ValidationError("\"spectrum\": component must be \"x\" or \"y\"");
  }
  if (!(s.x0 > 0.0) || !(s.y0 > 0.0)) {
    throw ValidationError("\"spectrum\": initial state must be positive");
  }
  if (!(s.t_end > 0.0) || !(s.dt > 0.0) || s.discard_samples < 0 || s.n_samples < 2000) {
    throw ValidationError(
        "\"spectrum\": need t_end > 0, dt > 0, discard_samples >= 0, n_samples >= 2000");
  }
  const auto available = static_cast<long long>(s.t_end / s.dt) + 1;
  if (available < s.discard_samples + s.n_samples) {
    throw ValidationError("\"spectrum\": t_end/dt yields too few samples for the protocol");
  }
  return s;
}

ControlConfig parse_control(const json& obj) {
  require_object(obj, "\"control\"");
  reject_unknown_keys(obj, "\"control\"",
                      {"b", "b1", "b2", "b3", "x0", "y0", "xi0", "t_end", "dt"});
  ControlConfig c{};
  c.gains.b = get_number(obj, "\"control\"", "b");
  c.gains.b1 = get_number(obj, "\"control\"", "b1");
  c.gains.b2 = get_number(obj, "\"control\"", "b2");
  c.gains.b3 = get_number(obj, "\"control\"", "b3");
  validate(c.gains);
  if (obj.contains("x0")) c.x0 = get_number(obj, "\"control\"", "x0");
  if (obj.contains("y0")) c.y0 = get_number(obj, "\"control\"", "y0");
  if (obj.contains("xi0")) c.xi0 = get_number(obj, "\"control\"", "xi0");
  c.t_end = get_number_or(obj, "\"control\"", "t_end", c.t_end);
  c.dt = get_number_or(obj, "\"control\"", "dt", c.dt);
  if (c.x0.has_value() != c.y0.has_value() || c.x0.has_value() != c.xi0.has_value()) {
    throw ValidationError("\"control\": give all of x0, y0, xi0 or none");
  }
  if (c.t_end < 0.0 || !(c.dt > 0.0)) {
    throw ValidationError("\"control\": t_end must be >= 0 and dt > 0");
  }
  return c;
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open config file: " + path);
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& ex) {
    throw ValidationError("config is not valid JSON: " + std::string(ex.what()));
  }
  require_object(doc, "config");
  reject_unknown_keys(doc, "config",
                      {"params", "dimensional_params", "integrator", "out_dir", "seed", "simulate",
                       "global", "sweep", "lyapunov", "spectrum", "control"});

  ExperimentConfig cfg{};
  const bool has_nondim = doc.contains("params");
  const bool has_dim = doc.contains("dimensional_params");
  if (has_nondim == has_dim) {
    throw ValidationError(
        "config must contain exactly one of \"params\" and \"dimensional_params\"");
  }
  if (has_dim) {
    cfg.from_dimensional = true;
    cfg.dimensional = parse_dimensional(doc.at("dimensional_params"));
    cfg.params = nondimensionalize(cfg.dimensional);
  } else {
    cfg.params = parse_params(doc.at("params"));
  }

  if (doc.contains("integrator")) cfg.integrator = parse_integrator(doc.at("integrator"));
  if (doc.contains("out_dir")) {
    const json& v = doc.at("out_dir");
    if (!v.is_string()) throw ValidationError("\"out_dir\" must be a string");
    cfg.out_dir = v.get<std::string>();
  }
  if (doc.contains("seed")) {
    const json& v = doc.at("seed");
    if (!v.is_number_unsigned() && !v.is_number_integer()) {
      throw ValidationError("\"seed\" must be a non-negative integer");
    }
    const auto signed_seed = v.get<long long>();
    if (signed_seed < 0) throw ValidationError("\"seed\" must be a non-negative integer");
    cfg.seed = static_cast<std::uint64_t>(signed_seed);
  }

  if (doc.contains("simulate")) cfg.simulate = parse_simulate(doc.at("simulate"));
  if (doc.contains("global")) cfg.global = parse_global(doc.at("global"));
  if (doc.contains("sweep")) cfg.sweep = parse_sweep(doc.at("sweep"));
  if (doc.contains("lyapunov")) cfg.lyapunov = parse_lyapunov(doc.at("lyapunov"));
  if (doc.contains("spectrum")) cfg.spectrum = parse_spectrum(doc.at("spectrum"));
  if (doc.contains("control")) cfg.control = parse_control(doc.at("control"));

  if (cfg.simulate && cfg.simulate->xi0 && !cfg.control) {
    throw ValidationError("\"simulate\": xi0 requires a \"control\" block");
  }
  return cfg;
}

}  // namespace hvlab
