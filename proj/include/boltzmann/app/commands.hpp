#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "boltzmann/app/config.hpp"

namespace boltzmann::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailure = 1,
  kExitConfigError = 2,
  kExitRuntimeError = 3,
};

struct CommandResult {
  int exit_code = kExitOk;
  std::string message;
};

CommandResult cmd_simulate(const RunConfig& cfg);  // exact-g0 or perturbed
CommandResult cmd_gamma(const RunConfig& cfg);
CommandResult cmd_section(const RunConfig& cfg);
CommandResult cmd_region(const RunConfig& cfg);

/// Dispatches on cfg.mode and maps exceptions onto exit codes: configuration
/// problems to 2, numerical/runtime failures to 3. Diagnostics go to `log`.
int execute(const RunConfig& cfg, std::ostream& log);

/// Seeds sharing the twice-energy A, drawn reproducibly from `seed`. Only
/// states whose osculating ellipse reaches the wall are kept.
std::vector<CartesianState> ensemble_seeds(const EnsembleSpec& spec, const Params& p);

}  // namespace boltzmann::app
