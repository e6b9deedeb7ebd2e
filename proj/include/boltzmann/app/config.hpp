#pragma once

// Run configuration: one JSON document per run. Every problem is reported
// as a ConfigError carrying the JSON path of the offending field.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "boltzmann/perturbed.hpp"
#include "boltzmann/types.hpp"
#include "json.hpp"

namespace boltzmann::app {

enum class Mode { ExactG0, Perturbed, Gamma, Section, Region, Verify };

const char* to_string(Mode m);
/// Throws ConfigError (path "mode") for unknown names.
Mode mode_from_string(const std::string& s);

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Either a phase-space point or Kepler elements (A, a, theta0) plus the
/// true anomaly on that ellipse.
struct InitialCondition {
  bool cartesian = true;
  CartesianState state;
  double A = 0.0;
  double a = 0.0;
  double theta0 = 0.0;
  double nu = 0.0;

  CartesianState resolve(const Params& p) const;
};

struct EnsembleSpec {
  int count = 0;
  std::uint64_t seed = 0;
  double energy = 0.0;  // twice the energy, A
};

struct RunConfig {
  Mode mode = Mode::ExactG0;
  Params params;
  std::optional<InitialCondition> initial;
  int n_collisions = 0;
  perturbed::IntegratorConfig integrator;
  std::map<std::string, double> check_tolerances;  // verify overrides
  std::optional<EnsembleSpec> ensemble;
  std::vector<double> g_sweep;
  std::optional<double> A;  // region mode
  std::string output_dir;
  int samples_per_arc = 32;
  int figure_arcs = 12;
  int rerun_collisions = 400;
  int region_samples = 1001;
};

/// Strict parse: unknown keys, wrong types and missing mode-required fields
/// are errors.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// Built-in reference configuration for a mode (used when no file is given).
RunConfig default_config(Mode mode);

/// Re-checks the mode-dependent requirements; call after command-line overrides.
void validate(const RunConfig& cfg);

/// Effective configuration, including every default, for the manifest.
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace boltzmann::app
