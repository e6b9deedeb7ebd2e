// boltzmann: command-line front end.
//
//   boltzmann simulate [--config f.json] [--mode exact-g0|perturbed] [--n N] [--g G] [--out DIR]
//   boltzmann gamma    [--config f.json] [--n N] [--out DIR]
//   boltzmann section  [--config f.json] [--n N] [--g G] [--seed S] [--out DIR]
//   boltzmann region   [--config f.json] [--g G] [--out DIR]
//   boltzmann verify   [--config f.json] [--out DIR]
//
// Exit codes: 0 success, 1 check failure, 2 configuration error, 3 runtime error.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "boltzmann/app/commands.hpp"
#include "boltzmann/app/config.hpp"

using namespace boltzmann::app;

namespace {

struct Overrides {
  std::string config;
  std::string out;
  std::string mode;
  std::optional<int> n;
  std::optional<double> g;
  std::optional<std::uint64_t> seed;
};

void add_flags(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config, "JSON run configuration");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--mode", o.mode, "run mode (overrides the config)");
  sub->add_option("--n", o.n, "number of collisions");
  sub->add_option("--g", o.g, "centrifugal coupling g");
  sub->add_option("--seed", o.seed, "ensemble seed");
}

bool mode_fits(const std::string& sub, Mode m) {
  if (sub == "simulate") return m == Mode::ExactG0 || m == Mode::Perturbed;
  return sub == to_string(m);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kepler billiard against a straight wall: simulation and invariant checks"};
  app.require_subcommand(1);
  Overrides o;
  for (const char* name : {"simulate", "gamma", "section", "region", "verify"}) {
    add_flags(app.add_subcommand(name), o);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfigError;
  }
  const std::string sub = app.get_subcommands().front()->get_name();

  RunConfig cfg;
  try {
    if (!o.config.empty()) {
      cfg = load_config(o.config);
    } else {
      const Mode m = sub == "simulate" ? Mode::ExactG0 : mode_from_string(sub);
      cfg = default_config(!o.mode.empty() ? mode_from_string(o.mode) : m);
    }
    if (!o.mode.empty()) cfg.mode = mode_from_string(o.mode);
    if (!mode_fits(sub, cfg.mode)) {
      throw ConfigError("mode", std::string("'") + to_string(cfg.mode) + "' does not fit the " +
                                    sub + " subcommand");
    }
    if (o.n) cfg.n_collisions = *o.n;
    if (o.g) cfg.params.g = *o.g;
    if (o.seed) {
      if (!cfg.ensemble) throw ConfigError("ensemble", "--seed given but the run has no ensemble");
      cfg.ensemble->seed = *o.seed;
    }
    if (!o.out.empty()) cfg.output_dir = o.out;
    validate(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return execute(cfg, std::cerr);
}
