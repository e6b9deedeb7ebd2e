#pragma once

// Invariant suite on built-in reference configurations.

#include <map>
#include <string>
#include <vector>

#include "boltzmann/app/commands.hpp"
#include "json.hpp"

namespace boltzmann::app {

/// Names accepted as keys of "tolerances" to override a check threshold.
const std::vector<std::string>& verify_check_names();

enum class Sense {
  Below,         // measured < tolerance
  AtMost,        // measured <= tolerance
  Above,         // measured > tolerance
};

struct CheckResult {
  std::string name;
  std::string description;
  double measured = 0.0;
  double tolerance = 0.0;
  Sense sense = Sense::Below;
  bool passed = false;
  double margin = 0.0;  // distance to the threshold, positive when passing
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_passed = false;
  nlohmann::json to_json() const;
};

/// Runs every check. CSV tables of the reference runs are returned through
/// `tables` (file name -> content) when non-null.
VerifyReport run_verify_suite(const std::map<std::string, double>& overrides,
                              std::map<std::string, std::string>* tables = nullptr);

CommandResult cmd_verify(const RunConfig& cfg);

}  // namespace boltzmann::app
