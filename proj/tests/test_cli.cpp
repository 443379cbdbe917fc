// End-to-end tests that drive the real hvlab binary (path injected by the
// build as HVLAB_BIN): every subcommand, the exit-code taxonomy, strict
// config validation, byte-identical determinism of repeated and parallel
// runs, output-directory resolution, and the full reproduce pipeline.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Scratch directory removed at the end of each test case.
struct TempDir {
  fs::path path;
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "hvlab_cli_XXXXXX").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    REQUIRE(mkdtemp(buf.data()) != nullptr);
    path = buf.data();
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string str() const { return path.string(); }
};

/// Runs `hvlab <args>` with stdout/stderr silenced; returns the exit code.
int run_cli(const std::string& args) {
  const std::string cmd = std::string(HVLAB_BIN) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

/// Runs with an environment prefix (e.g. HVLAB_OUT=...).
int run_cli_env(const std::string& env, const std::string& args) {
  const std::string cmd = env + " " + std::string(HVLAB_BIN) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  REQUIRE(out.good());
  out << content;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const std::string& text) {
  std::size_t n = 0;
  for (char ch : text) {
    if (ch == '\n') ++n;
  }
  return n;
}

json read_json(const fs::path& p) { return json::parse(read_file(p)); }

// Canned configs used across the cases.
const char* kStableParams =
    R"("params": {"m": 1.2, "c": 0.3, "d": 0.4, "e": 0.25, "a": 0.2, "p": 0.7})";
const char* kCycleParams =
    R"("params": {"m": 1.2, "c": 1.0, "d": 0.7, "e": 0.2, "a": 0.2, "p": 0.7})";
const char* kHopfParams =
    R"("params": {"m": 1.2, "c": 0.25, "d": 1.0, "e": 0.45, "a": 0.2, "p": 0.5})";

std::string wrap(const std::string& body) { return "{\n" + body + "\n}\n"; }

}  // namespace

TEST_CASE("hopf subcommand locates the bifurcation point") {
  TempDir tmp;
  write_file(tmp.path / "cfg.json", wrap(kHopfParams));
  CHECK(run_cli("hopf --config " + tmp.str() + "/cfg.json --out " + tmp.str()) == 0);
  const json j = read_json(tmp.path / "hopf.json");
  CHECK(std::abs(j["p1"].get<double>() - 0.5) < 1e-6);
  CHECK(j["roots"].size() == 1);
  CHECK(j["g_at_0"].get<double>() < 0.0);
  CHECK(j["g_at_1"].get<double>() > 0.0);
  CHECK(std::abs(j["P1_at_p1"].get<double>()) < 1e-8);
  CHECK(j["hopf_eligible_at_p1"].get<bool>());
}

TEST_CASE("equilibrium report round-trips through JSON") {
  TempDir tmp;
  write_file(tmp.path / "cfg.json", wrap(kStableParams));
  CHECK(run_cli("equilibrium --config " + tmp.str() + "/cfg.json --out " + tmp.str()) == 0);
  const json j = read_json(tmp.path / "equilibrium.json");
  CHECK(j["classification"] == "stable-focus");
  CHECK(j["hopf_eligible"].get<bool>());
  CHECK(std::abs(j["equilibrium"]["x"].get<double>() - 0.425) < 1e-12);
  CHECK(std::abs(j["P1"].get<double>() - (-0.16466264430490002)) < 1e-12);
  CHECK(j["eigenvalues"].size() == 2);
  CHECK(j["eigenvalues"][0].contains("re"));
  CHECK(j["eigenvalues"][0].contains("im"));
}

TEST_CASE("simulate with an empty time window writes a single row") {
  TempDir tmp;
  write_file(tmp.path / "cfg.json",
             wrap(std::string(kStableParams) +
                  ",\n\"simulate\": {\"x0\": 0.5, \"y0\": 0.5, \"t_end\": 0, \"dt\": 0.5}"));
  CHECK(run_cli("simulate --config " + tmp.str() + "/cfg.json --out " + tmp.str()) == 0);
  CHECK(read_file(tmp.path / "simulate.csv") == "t,x,y\n0,0.5,0.5\n");
}

TEST_CASE("spectrum writes 513 bins with the cycle's dominant frequency") {
  TempDir tmp;
  write_file(tmp.path / "cfg.json",
             wrap(std::string(kCycleParams) + ",\n\"spectrum\": {\"x0\": 0.5, \"y0\": 0.5}"));
  CHECK(run_cli("spectrum --config " + tmp.str() + "/cfg.json --out " + tmp.str()) == 0);
  const std::string csv = read_file(tmp.path / "spectrum.csv");
  REQUIRE(line_count(csv) == 514);  // header + 513 bins
  CHECK(csv.rfind("freq,power\n", 0) == 0);

  // Find the peak bin from the CSV itself.
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  int k = 0, peak = 0;
  double best = -1.0;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    REQUIRE(comma != std::string::npos);
    const double power = std::stod(line.substr(comma + 1));
    if (k > 0 && power > best) {
      best = power;
      peak = k;
    }
    ++k;
  }
  CHECK(peak == 63);
}

TEST_CASE("repeated runs are byte-identical") {
  TempDir tmp;
  write_file(tmp.path / "cfg.json",
             wrap(std::string(kCycleParams) + ",\n\"spectrum\": {\"x0\": 0.5, \"y0\": 0.5}"));
  const fs::path out1 = tmp.path / "a", out2 = tmp.path / "b";
  CHECK(run_cli("spectrum --config " + tmp.str() + "/cfg.json --out " + out1.string()) == 0);
  CHECK(run_cli("spectrum --config " + tmp.str() + "/cfg.json --out " + out2.string()) == 0);
  CHECK(read_file(out1 / "spectrum.csv") == read_file(out2 / "spectrum.csv"));
}

TEST_CASE("cold-start sweep is reproducible across worker counts") {
  TempDir tmp;
  write_file(tmp.path / "cfg.json",
             wrap(std::string(kHopfParams) +
                  ",\n\"sweep\": {\"p_min\": 0.44, \"p_max\": 0.56, \"p_step\": 0.01, "
                  "\"transient\": 2000, \"window\": 300, \"x0\": 0.8, \"y0\": 0.4, "
                  "\"continuation\": false}"));
  const fs::path out1 = tmp.path / "w1", out4 = tmp.path / "w4";
  CHECK(run_cli("sweep --config " + tmp.str() + "/cfg.json --out " + out1.string() +
                " --workers 1") == 0);
  CHECK(run_cli("sweep --config " + tmp.str() + "/cfg.json --out " + out4.string() +
                " --workers 4") == 0);
  const std::string csv = read_file(out1 / "sweep.csv");
  CHECK(csv == read_file(out4 / "sweep.csv"));
  REQUIRE(line_count(csv) == 14);  // header + 13 grid points
  CHECK(csv.rfind("p,min_x,max_x,regime\n", 0) == 0);
  CHECK(csv.find("fixed-point") != std::string::npos);
  CHECK(csv.find("limit-cycle") != std::string::npos);

  // Continuation seeding is sequential: requesting workers is a usage error.
  write_file(tmp.path / "cont.json",
             wrap(std::string(kHopfParams) +
                  ",\n\"sweep\": {\"p_min\": 0.44, \"p_max\": 0.56, \"p_step\": 0.01, "
                  "\"transient\": 2000, \"window\": 300, \"continuation\": true}"));
  CHECK(run_cli("sweep --config " + tmp.str() + "/cont.json --out " + tmp.str() +
                " --workers 4") == 2);
}

TEST_CASE("exit-code taxonomy") {
  TempDir tmp;
  // Usage errors: unknown command, missing --config.
  CHECK(run_cli("frobnicate") == 1);
  CHECK(run_cli("equilibrium") == 1);

  // Validation errors: unreadable config, malformed JSON, unknown key,
  // model family without an interior equilibrium.
  CHECK(run_cli("equilibrium --config " + tmp.str() + "/missing.json --out " + tmp.str()) == 2);
  write_file(tmp.path / "bad.json", "{ this is not json");
  CHECK(run_cli("equilibrium --config " + tmp.str() + "/bad.json --out " + tmp.str()) == 2);
  write_file(tmp.path / "unk.json",
             wrap(std::string(kStableParams) + ",\n\"typo_block\": {}"));
  CHECK(run_cli("equilibrium --config " + tmp.str() + "/unk.json --out " + tmp.str()) == 2);
  write_file(tmp.path / "noeq.json",
             wrap(R"("params": {"m": 1.0, "c": 0.3, "d": 0.5, "e": 0.8, "a": 0.2, "p": 0.5})"));
  CHECK(run_cli("equilibrium --config " + tmp.str() + "/noeq.json --out " + tmp.str()) == 2);

  // Numerical failure: predator blow-up stops the simulation.
  write_file(tmp.path / "blow.json",
             wrap(R"("params": {"m": 0.1, "c": 1.0, "d": 1.0, "e": 0.2, "a": 0.5, "p": 0.5},
"simulate": {"x0": 0.5, "y0": 1.0, "t_end": 5, "dt": 0.5})"));
  CHECK(run_cli("simulate --config " + tmp.str() + "/blow.json --out " + tmp.str()) == 3);
  // The partial trajectory is still written for post-mortem inspection.
  const std::string partial = read_file(tmp.path / "simulate.csv");
  CHECK(line_count(partial) > 2);
}

TEST_CASE("strict config schema") {
  TempDir tmp;
  // params and dimensional_params are mutually exclusive, and one is required.
  write_file(tmp.path / "both.json",
             wrap(std::string(kStableParams) +
                  ",\n\"dimensional_params\": {\"R\": 2, \"K\": 1, \"M\": 2.4, \"C\": 0.3, "
                  "\"D\": 0.8, \"E\": 0.5, \"A\": 0.2, \"p\": 0.7}"));
  CHECK(run_cli("equilibrium --config " + tmp.str() + "/both.json --out " + tmp.str()) == 2);
  write_file(tmp.path / "none.json", "{}\n");
  CHECK(run_cli("equilibrium --config " + tmp.str() + "/none.json --out " + tmp.str()) == 2);

  // Unknown key inside a block.
  write_file(tmp.path / "inner.json",
             wrap(std::string(kStableParams) +
                  ",\n\"simulate\": {\"x0\": 0.5, \"y0\": 0.5, \"oops\": 1}"));
  CHECK(run_cli("simulate --config " + tmp.str() + "/inner.json --out " + tmp.str()) == 2);

  // Spectrum protocol floor on the sample count.
  write_file(tmp.path / "short.json",
             wrap(std::string(kCycleParams) +
                  ",\n\"spectrum\": {\"x0\": 0.5, \"y0\": 0.5, \"n_samples\": 1500}"));
  CHECK(run_cli("spectrum --config " + tmp.str() + "/short.json --out " + tmp.str()) == 2);

  // Controlled initial conditions are all-or-none.
  write_file(tmp.path / "partial.json",
             wrap(std::string(kCycleParams) +
                  ",\n\"control\": {\"b\": 0.3, \"b1\": 0.3, \"b2\": 0.2, \"b3\": 0.7, "
                  "\"x0\": 0.2}"));
  CHECK(run_cli("control --config " + tmp.str() + "/partial.json --out " + tmp.str()) == 2);

  // The dimensional route is accepted and matches the direct parameters.
  write_file(tmp.path / "dim.json",
             wrap(R"("dimensional_params": {"R": 2, "K": 1, "M": 2.4, "C": 0.3, "D": 0.8, "E": 0.5, "A": 0.2, "p": 0.7})"));
  CHECK(run_cli("equilibrium --config " + tmp.str() + "/dim.json --out " + tmp.str()) == 0);
  const json j = read_json(tmp.path / "equilibrium.json");
  CHECK(std::abs(j["equilibrium"]["x"].get<double>() - 0.425) < 1e-12);
}

TEST_CASE("global subcommand reports per-IC convergence") {
  TempDir tmp;
  write_file(tmp.path / "cfg.json", wrap(std::string(kStableParams) + ",\n\"global\": {}"));
  CHECK(run_cli("global --config " + tmp.str() + "/cfg.json --out " + tmp.str()) == 0);
  const json j = read_json(tmp.path / "global.json");
  REQUIRE(j["initial_conditions"].size() == 10);
  CHECK(j["all_converged"].get<bool>());
  for (const auto& d : j["final_distances"]) CHECK(d.get<double>() < 1e-3);
  for (const auto& c : j["converged"]) CHECK(c.get<bool>());
  for (int i = 0; i < 10; ++i) {
    CHECK(fs::exists(tmp.path / ("global_ic" + std::to_string(i) + ".csv")));
  }
  CHECK_FALSE(fs::exists(tmp.path / "global_ic10.csv"));
}

TEST_CASE("global subcommand seeds extra initial conditions deterministically") {
  TempDir tmp;
  write_file(tmp.path / "cfg.json",
             wrap(std::string(kStableParams) + ",\n\"global\": {\"extra_random_ics\": 2}"));
  const fs::path s7a = tmp.path / "s7a", s7b = tmp.path / "s7b", s8 = tmp.path / "s8";
  CHECK(run_cli("global --config " + tmp.str() + "/cfg.json --out " + s7a.string() +
                " --seed 7") == 0);
  CHECK(run_cli("global --config " + tmp.str() + "/cfg.json --out " + s7b.string() +
                " --seed 7") == 0);
  CHECK(run_cli("global --config " + tmp.str() + "/cfg.json --out " + s8.string() +
                " --seed 8") == 0);
  CHECK(fs::exists(s7a / "global_ic11.csv"));
  CHECK(read_file(s7a / "global.json") == read_file(s7b / "global.json"));
  CHECK(read_file(s7a / "global_ic10.csv") == read_file(s7b / "global_ic10.csv"));
  const json ja = read_json(s7a / "global.json");
  const json j8 = read_json(s8 / "global.json");
  CHECK(ja["initial_conditions"][10] != j8["initial_conditions"][10]);
}

TEST_CASE("lyapunov subcommand writes the report and history") {
  TempDir tmp;
  write_file(tmp.path / "cfg.json",
             wrap(std::string(kStableParams) +
                  ",\n\"lyapunov\": {\"x0\": 0.5, \"y0\": 0.5, \"total_time\": 500, "
                  "\"transient\": 100}"));
  CHECK(run_cli("lyapunov --config " + tmp.str() + "/cfg.json --out " + tmp.str()) == 0);
  const json j = read_json(tmp.path / "lyapunov.json");
  CHECK(j["lambda1"].get<double>() < 0.0);
  CHECK(j["lambda2"].get<double>() < 0.0);
  CHECK(j["converged"].get<bool>());
  const std::string hist = read_file(tmp.path / "lyapunov_history.csv");
  CHECK(hist.rfind("t,lambda1,lambda2\n", 0) == 0);
  CHECK(line_count(hist) == 401);  // header + one renormalization per unit time after t=100
}

TEST_CASE("control subcommand verdicts match the gains") {
  TempDir tmp;
  write_file(tmp.path / "on.json",
             wrap(std::string(kCycleParams) +
                  ",\n\"control\": {\"b\": 0.3, \"b1\": 0.3, \"b2\": 0.2, \"b3\": 0.7, "
                  "\"t_end\": 50, \"dt\": 0.5}"));
  CHECK(run_cli("control --config " + tmp.str() + "/on.json --out " + tmp.str()) == 0);
  json j = read_json(tmp.path / "control.json");
  CHECK(j["stable"].get<bool>());
  const std::string traj = read_file(tmp.path / "control_traj.csv");
  CHECK(traj.rfind("t,x,y,xi\n", 0) == 0);
  CHECK(line_count(traj) == 102);  // header + 101 samples at dt = 0.5 over [0, 50]

  write_file(tmp.path / "off.json",
             wrap(std::string(kCycleParams) +
                  ",\n\"control\": {\"b\": 0.0, \"b1\": 0.3, \"b2\": 0.2, \"b3\": 0.7, "
                  "\"t_end\": 50, \"dt\": 0.5}"));
  const fs::path out_off = tmp.path / "off";
  CHECK(run_cli("control --config " + tmp.str() + "/off.json --out " + out_off.string()) == 0);
  j = read_json(out_off / "control.json");
  CHECK_FALSE(j["stable"].get<bool>());
}

TEST_CASE("plot flag emits gnuplot scripts") {
  TempDir tmp;
  write_file(tmp.path / "cfg.json",
             wrap(std::string(kStableParams) +
                  ",\n\"simulate\": {\"x0\": 0.5, \"y0\": 0.5, \"t_end\": 10, \"dt\": 0.5}"));
  const fs::path plain = tmp.path / "plain", plotted = tmp.path / "plotted";
  CHECK(run_cli("simulate --config " + tmp.str() + "/cfg.json --out " + plain.string()) == 0);
  CHECK_FALSE(fs::exists(plain / "simulate.gp"));
  CHECK(run_cli("simulate --config " + tmp.str() + "/cfg.json --out " + plotted.string() +
                " --plot") == 0);
  CHECK(fs::exists(plotted / "simulate.gp"));
  const std::string gp = read_file(plotted / "simulate.gp");
  CHECK(gp.find("gnuplot") != std::string::npos);
  CHECK(gp.find("simulate.csv") != std::string::npos);
}

TEST_CASE("output directory resolution prefers --out over HVLAB_OUT") {
  TempDir tmp;
  write_file(tmp.path / "cfg.json", wrap(kStableParams));
  const fs::path env_dir = tmp.path / "from_env", opt_dir = tmp.path / "from_opt";

  CHECK(run_cli_env("HVLAB_OUT=" + env_dir.string(),
                    "bounds --config " + tmp.str() + "/cfg.json") == 0);
  CHECK(fs::exists(env_dir / "bounds.json"));

  CHECK(run_cli_env("HVLAB_OUT=" + env_dir.string(), "bounds --config " + tmp.str() +
                                                         "/cfg.json --out " + opt_dir.string()) ==
        0);
  CHECK(fs::exists(opt_dir / "bounds.json"));
  const json j = read_json(opt_dir / "bounds.json");
  CHECK(j["M1"].get<double>() == 1.0);
  CHECK_FALSE(j["bounds_valid"].get<bool>());
}

TEST_CASE("reproduce writes every figure and the manifest") {
  TempDir tmp;
  CHECK(run_cli("reproduce --out " + tmp.str()) == 0);
  const json manifest = read_json(tmp.path / "manifest.json");
  REQUIRE(manifest.size() == 6);
  for (const auto& key : {"fig1", "fig2", "fig3", "fig4", "fig5", "fig6"}) {
    REQUIRE(manifest.contains(key));
    CHECK(manifest[key]["status"] == "ok");
  }
  CHECK(manifest["fig2"]["regime"] == "limit-cycle");
  CHECK(manifest["fig4"]["all_converged"].get<bool>());
  CHECK(manifest["fig5"]["within_one_step"].get<bool>());
  CHECK(std::abs(manifest["fig5"]["transition_p"].get<double>() - 0.5) < 0.011);
  CHECK_FALSE(manifest["fig6"]["off"]["stable"].get<bool>());
  CHECK(manifest["fig6"]["on"]["stable"].get<bool>());

  for (const auto& name :
       {"fig1_trajectory.csv", "fig1.gp", "fig2_trajectory.csv", "fig2.gp",
        "fig3_stable_history.csv", "fig3_cycle_history.csv", "fig3.gp", "fig4_ic0.csv",
        "fig4_ic9.csv", "fig4.gp", "fig5a_trajectory.csv", "fig5b_trajectory.csv",
        "fig5c_sweep.csv", "fig5a.gp", "fig5b.gp", "fig5c.gp", "fig6_off_traj.csv",
        "fig6_on_traj.csv", "fig6.gp"}) {
    CHECK(fs::exists(tmp.path / name));
  }
}
