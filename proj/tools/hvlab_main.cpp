// hvlab: analysis toolkit for a predator-prey model with a Hassell-Varley
// functional response and a generalist predator.
//
//   hvlab <command> --config <path> [--plot] [--out <dir>] [--workers N] [--seed S]
//
// Commands: equilibrium, simulate, bounds, global, hopf, sweep, lyapunov,
// spectrum, control, reproduce.  Exit codes: 0 success, 1 usage, 2 validation
// error, 3 numerical failure.

#include <cstdint>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hvlab/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"hvlab: Hassell-Varley predator-prey analysis toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  bool plot = false;
  int workers = 1;
  std::uint64_t seed_value = 0;

  const struct {
    const char* name;
    const char* help;
  } commands[] = {
      {"equilibrium", "interior equilibrium and local stability report (JSON)"},
      {"simulate", "integrate the plant (or controlled system) and write a CSV trajectory"},
      {"bounds", "boundedness conditions and explicit bounds (JSON)"},
      {"global", "global-stability conditions plus multi-initial-condition runs"},
      {"hopf", "Hopf point p1 in the group-behaviour exponent (JSON)"},
      {"sweep", "bifurcation sweep over p (CSV: p,min_x,max_x,regime)"},
      {"lyapunov", "Lyapunov exponents with convergence history (JSON + CSV)"},
      {"spectrum", "Welch power spectral density of a sampled component (CSV)"},
      {"control", "controlled equilibrium, spectrum, and trajectory (JSON + CSV)"},
      {"reproduce", "run the six canned figure configurations and write a manifest"},
  };

  for (const auto& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    CLI::Option* copt =
        sub->add_option("--config", config_path, "JSON experiment configuration file");
    if (std::string(cmd.name) != "reproduce") copt->required();
    sub->add_flag("--plot", plot, "also emit gnuplot scripts");
    sub->add_option("--out", out_dir, "output directory (overrides config and HVLAB_OUT)");
    sub->add_option("--workers", workers, "worker threads for sweep/global")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed_value, "seed override for random initial-condition batches");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the usage message
    return 1;
  }

  CLI::App* sub = app.get_subcommands().front();
  hvlab::CliOptions opts;
  opts.config_path = config_path;
  opts.out_dir = out_dir;
  opts.plot = plot;
  opts.workers = workers;
  if (sub->count("--seed") > 0) opts.seed = seed_value;
  return hvlab::run(sub->get_name(), opts);
}
