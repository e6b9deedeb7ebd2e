#include "boltzmann/app/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "boltzmann/app/verify.hpp"
#include "boltzmann/kepler.hpp"

namespace boltzmann::app {

using nlohmann::json;

namespace {

struct ModeName {
  Mode mode;
  const char* name;
};

constexpr ModeName kModes[] = {
    {Mode::ExactG0, "exact-g0"}, {Mode::Perturbed, "perturbed"}, {Mode::Gamma, "gamma"},
    {Mode::Section, "section"},  {Mode::Region, "region"},       {Mode::Verify, "verify"},
};

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void expect_object(const json& j, const std::string& path, std::set<std::string> allowed) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) throw ConfigError(join(path, item.key()), "unknown field");
  }
}

double number(const json& j, const std::string& key, const std::string& path) {
  const std::string where = join(path, key);
  if (!j.contains(key)) throw ConfigError(where, "missing");
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(where, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(where, "must be finite");
  return x;
}

double number_or(const json& j, const std::string& key, const std::string& path, double fallback) {
  return j.contains(key) ? number(j, key, path) : fallback;
}

int integer_or(const json& j, const std::string& key, const std::string& path, int fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
  return v.get<int>();
}

Params parse_params(const json& j) {
  expect_object(j, "params", {"alpha", "g", "h"});
  Params p;
  p.alpha = number(j, "alpha", "params");
  p.g = number_or(j, "g", "params", 0.0);
  p.h = number(j, "h", "params");
  return p;
}

InitialCondition parse_initial(const json& j) {
  expect_object(j, "initial", {"cartesian", "elements"});
  if (j.contains("cartesian") == j.contains("elements")) {
    throw ConfigError("initial", "give exactly one of 'cartesian' or 'elements'");
  }
  InitialCondition ic;
  if (j.contains("cartesian")) {
    const json& c = j.at("cartesian");
    expect_object(c, "initial.cartesian", {"x", "y", "px", "py", "t"});
    const std::string path = "initial.cartesian";
    ic.cartesian = true;
    ic.state = {number(c, "x", path), number(c, "y", path), number(c, "px", path),
                number(c, "py", path), number_or(c, "t", path, 0.0)};
  } else {
    const json& e = j.at("elements");
    expect_object(e, "initial.elements", {"A", "a", "theta0", "anomaly"});
    const std::string path = "initial.elements";
    ic.cartesian = false;
    ic.A = number(e, "A", path);
    ic.a = number(e, "a", path);
    ic.theta0 = number(e, "theta0", path);
    ic.nu = number_or(e, "anomaly", path, 0.0);
  }
  return ic;
}

EnsembleSpec parse_ensemble(const json& j) {
  expect_object(j, "ensemble", {"count", "seed", "energy"});
  EnsembleSpec e;
  e.count = integer_or(j, "count", "ensemble", -1);
  if (!j.contains("count")) throw ConfigError("ensemble.count", "missing");
  if (!j.contains("seed")) throw ConfigError("ensemble.seed", "missing (required for reproducibility)");
  if (!j.at("seed").is_number_unsigned()) {
    throw ConfigError("ensemble.seed", "expected a non-negative integer");
  }
  e.seed = j.at("seed").get<std::uint64_t>();
  e.energy = number(j, "energy", "ensemble");
  return e;
}

void parse_tolerances(const json& j, RunConfig& cfg) {
  if (!j.is_object()) throw ConfigError("tolerances", "expected an object");
  perturbed::IntegratorConfig& ic = cfg.integrator;
  const std::map<std::string, double*> integrator = {
      {"rel_tol", &ic.rel_tol},         {"abs_tol", &ic.abs_tol},
      {"max_step", &ic.max_step},       {"event_tol", &ic.event_tol},
      {"initial_step", &ic.initial_step}, {"max_time", &ic.max_time},
      {"escape_radius", &ic.escape_radius}, {"min_radius", &ic.min_radius},
  };
  const auto& checks = verify_check_names();
  for (const auto& item : j.items()) {
    const double v = number(j, item.key(), "tolerances");
    if (auto it = integrator.find(item.key()); it != integrator.end()) {
      *it->second = v;
    } else if (std::find(checks.begin(), checks.end(), item.key()) != checks.end()) {
      cfg.check_tolerances[item.key()] = v;
    } else {
      throw ConfigError("tolerances." + item.key(), "unknown tolerance");
    }
  }
}

}  // namespace

const char* to_string(Mode m) {
  for (const auto& mn : kModes) {
    if (mn.mode == m) return mn.name;
  }
  return "?";
}

Mode mode_from_string(const std::string& s) {
  for (const auto& mn : kModes) {
    if (s == mn.name) return mn.mode;
  }
  throw ConfigError("mode", "unknown mode '" + s + "'");
}

CartesianState InitialCondition::resolve(const Params& p) const {
  if (cartesian) return state;
  return kepler::cartesian_from_elements(kepler::OrbitalElements::make(A, a, theta0, p.alpha), nu);
}

RunConfig parse_config(const json& j) {
  expect_object(j, "", {"mode", "params", "initial", "n_collisions", "tolerances", "ensemble",
                        "g_sweep", "A", "output_dir", "samples_per_arc", "figure_arcs",
                        "rerun_collisions", "region_samples"});
  if (!j.contains("mode")) throw ConfigError("mode", "missing");
  if (!j.at("mode").is_string()) throw ConfigError("mode", "expected a string");
  RunConfig cfg = default_config(mode_from_string(j.at("mode").get<std::string>()));
  cfg.initial.reset();
  cfg.ensemble.reset();
  cfg.A.reset();
  cfg.g_sweep.clear();

  const bool needs_params = cfg.mode != Mode::Verify;
  if (j.contains("params")) {
    cfg.params = parse_params(j.at("params"));
  } else if (needs_params) {
    throw ConfigError("params", "missing");
  }
  if (j.contains("initial")) cfg.initial = parse_initial(j.at("initial"));
  if (j.contains("n_collisions")) {
    cfg.n_collisions = integer_or(j, "n_collisions", "", 0);
  } else if (cfg.mode != Mode::Region && cfg.mode != Mode::Verify) {
    throw ConfigError("n_collisions", "missing");
  }
  if (j.contains("tolerances")) parse_tolerances(j.at("tolerances"), cfg);
  if (j.contains("ensemble")) cfg.ensemble = parse_ensemble(j.at("ensemble"));
  if (j.contains("g_sweep")) {
    const json& s = j.at("g_sweep");
    if (!s.is_array()) throw ConfigError("g_sweep", "expected an array of numbers");
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!s[i].is_number()) throw ConfigError("g_sweep[" + std::to_string(i) + "]", "expected a number");
      cfg.g_sweep.push_back(s[i].get<double>());
    }
  }
  if (j.contains("A")) cfg.A = number(j, "A", "");
  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string()) throw ConfigError("output_dir", "expected a string");
    cfg.output_dir = j.at("output_dir").get<std::string>();
  }
  cfg.samples_per_arc = integer_or(j, "samples_per_arc", "", cfg.samples_per_arc);
  cfg.figure_arcs = integer_or(j, "figure_arcs", "", cfg.figure_arcs);
  cfg.rerun_collisions = integer_or(j, "rerun_collisions", "", cfg.rerun_collisions);
  cfg.region_samples = integer_or(j, "region_samples", "", cfg.region_samples);
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

RunConfig default_config(Mode mode) {
  RunConfig cfg;
  cfg.mode = mode;
  cfg.params = Params{1.0, 0.0, 1.0};
  cfg.output_dir = std::string("out/") + to_string(mode);
  InitialCondition ic;
  ic.cartesian = false;
  switch (mode) {
    case Mode::ExactG0:
    case Mode::Perturbed:
      ic.A = -0.5;
      ic.a = std::sqrt(0.32);
      ic.theta0 = 2.0;
      ic.nu = 0.0;
      cfg.initial = ic;
      cfg.n_collisions = 100;
      break;
    case Mode::Gamma:
      ic.A = -0.125;
      ic.a = std::sqrt(1.5);
      ic.theta0 = 4.0;
      ic.nu = kPi;
      cfg.initial = ic;
      cfg.n_collisions = 1000;
      break;
    case Mode::Section:
      cfg.ensemble = EnsembleSpec{8, 20240501, -0.5};
      cfg.n_collisions = 300;
      break;
    case Mode::Region:
      cfg.A = -0.5;
      break;
    case Mode::Verify:
      break;
  }
  return cfg;
}

void validate(const RunConfig& cfg) {
  if (cfg.mode != Mode::Verify) {
    try {
      cfg.params.validate();
    } catch (const Error& e) {
      throw ConfigError("params", e.detail());
    }
  }
  if (cfg.n_collisions < 0) throw ConfigError("n_collisions", "must be >= 0");
  try {
    cfg.integrator.validate();
  } catch (const Error& e) {
    throw ConfigError("tolerances", e.detail());
  }
  switch (cfg.mode) {
    case Mode::ExactG0:
    case Mode::Gamma:
      if (cfg.params.g != 0.0) {
        throw ConfigError("params.g", std::string(to_string(cfg.mode)) + " mode needs g = 0");
      }
      [[fallthrough]];
    case Mode::Perturbed:
      if (!cfg.initial) throw ConfigError("initial", "missing");
      break;
    case Mode::Section:
      if (!cfg.ensemble) throw ConfigError("ensemble", "missing");
      if (cfg.ensemble->count < 0) throw ConfigError("ensemble.count", "must be >= 0");
      if (!(cfg.ensemble->energy < 0.0)) throw ConfigError("ensemble.energy", "must be negative");
      break;
    case Mode::Region:
      if (!cfg.A && !cfg.initial) throw ConfigError("A", "missing (or give 'initial')");
      if (cfg.region_samples < 2) throw ConfigError("region_samples", "must be >= 2");
      break;
    case Mode::Verify:
      break;
  }
  if (cfg.samples_per_arc < 0) throw ConfigError("samples_per_arc", "must be >= 0");
  if (cfg.figure_arcs < 0) throw ConfigError("figure_arcs", "must be >= 0");
  if (cfg.rerun_collisions < 100) throw ConfigError("rerun_collisions", "must be >= 100");
  if (cfg.output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
}

json to_json(const RunConfig& cfg) {
  json j;
  j["mode"] = to_string(cfg.mode);
  j["params"] = {{"alpha", cfg.params.alpha}, {"g", cfg.params.g}, {"h", cfg.params.h}};
  if (cfg.initial) {
    const InitialCondition& ic = *cfg.initial;
    if (ic.cartesian) {
      j["initial"]["cartesian"] = {{"x", ic.state.x},   {"y", ic.state.y}, {"px", ic.state.px},
                                   {"py", ic.state.py}, {"t", ic.state.t}};
    } else {
      j["initial"]["elements"] = {{"A", ic.A}, {"a", ic.a}, {"theta0", ic.theta0}, {"anomaly", ic.nu}};
    }
  }
  j["n_collisions"] = cfg.n_collisions;
  const perturbed::IntegratorConfig& ic = cfg.integrator;
  json tol = {{"rel_tol", ic.rel_tol},           {"abs_tol", ic.abs_tol},
              {"max_step", ic.max_step},         {"event_tol", ic.event_tol},
              {"initial_step", ic.initial_step}, {"max_time", ic.max_time},
              {"escape_radius", ic.escape_radius}, {"min_radius", ic.min_radius}};
  for (const auto& [name, value] : cfg.check_tolerances) tol[name] = value;
  j["tolerances"] = tol;
  if (cfg.ensemble) {
    j["ensemble"] = {{"count", cfg.ensemble->count},
                     {"seed", cfg.ensemble->seed},
                     {"energy", cfg.ensemble->energy}};
  }
  if (!cfg.g_sweep.empty()) j["g_sweep"] = cfg.g_sweep;
  if (cfg.A) j["A"] = *cfg.A;
  j["output_dir"] = cfg.output_dir;
  j["samples_per_arc"] = cfg.samples_per_arc;
  j["figure_arcs"] = cfg.figure_arcs;
  j["rerun_collisions"] = cfg.rerun_collisions;
  j["region_samples"] = cfg.region_samples;
  return j;
}

}  // namespace boltzmann::app
