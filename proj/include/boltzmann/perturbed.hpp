#pragma once

// Direct integration of Hamilton's equations for
//   H = (px^2 + py^2)/2 - alpha/(2r) + g/(2r^2)
// with located wall events. Serves as the g = 0 cross-check of the
// event-driven propagation and as the tool for g > 0 sections.
//
// Arcs are integrated in Levi-Civita variables (z = u^2, dt = r ds), so
// step sizes and max_step refer to the fictitious time s.

#include <string>
#include <vector>

#include "boltzmann/types.hpp"

namespace boltzmann::perturbed {

struct IntegratorConfig {
  double rel_tol = 1e-12;
  double abs_tol = 1e-12;
  double max_step = 0.25;       // in s
  double event_tol = 1e-12;
  double initial_step = 1e-3;
  double max_time = 1e4;        // per arc; NoCollision beyond it
  double escape_radius = 1e6;
  double min_radius = 1e-6;     // singularity guard around the center

  /// Throws DomainError unless every field is positive.
  void validate() const;
};

struct SectionPoint {
  int n = 0;
  double t = 0.0;
  double x = 0.0;
  double lambda = 0.0;     // angle of the incoming velocity with the wall, (0, pi)
  double R_value = 0.0;    // a^2 + h alpha e sin(theta0) of the osculating ellipse
  CartesianState state;    // incoming state at the wall
};

struct WallArrival {
  CartesianState state;   // on the wall (|y - h| < event_tol), approaching
  double elapsed = 0.0;
  double max_energy_error = 0.0;  // max |H - H0| / |H0| over the accepted steps
  int steps = 0;
};

struct EnergyReport {
  double H0 = 0.0;
  double max_arc_error = 0.0;         // worst per-arc relative drift
  double max_reflection_error = 0.0;  // |H(after) - H(before)| / |H0| at impacts
  double final_error = 0.0;           // |H(end) - H0| / |H0|
};

struct PerturbedRun {
  std::vector<SectionPoint> points;
  EnergyReport energy;
};

double hamiltonian(const CartesianState& s, const Params& p);

/// Integrates until the next crossing of y = h with p_y > 0. A state already on
/// the wall and approaching it returns immediately. Throws EscapeDetected,
/// StepFailure (including the singularity guard), NoCollision, GrazingContact.
WallArrival integrate_to_wall(const CartesianState& s, const Params& p,
                              const IntegratorConfig& cfg = {});

/// Free flight for a signed duration, ignoring the wall.
CartesianState propagate(const CartesianState& s, double duration, const Params& p,
                         const IntegratorConfig& cfg = {});

/// n wall impacts with elastic reflection between them.
PerturbedRun run_perturbed(const CartesianState& s0, int n, const Params& p,
                           const IntegratorConfig& cfg = {});

struct SeedResult {
  bool ok = false;
  std::string error;
  PerturbedRun run;
};

/// Independent runs for seeds of equal energy, evaluated concurrently. A
/// failing seed reports its error and leaves the others untouched.
std::vector<SeedResult> section_ensemble(const std::vector<CartesianState>& seeds, int n,
                                         const Params& p, const IntegratorConfig& cfg = {});

}  // namespace boltzmann::perturbed
