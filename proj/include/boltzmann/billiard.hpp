#pragma once

// Event-driven propagation of the g = 0 billiard: Kepler arcs between exact
// wall crossings, elastic reflection on y = h, and the invariants carried
// from one collision to the next.

#include <optional>
#include <string>
#include <vector>

#include "boltzmann/kepler.hpp"
#include "boltzmann/types.hpp"

namespace boltzmann::billiard {

using kepler::OrbitalElements;

struct WallCrossing {
  double E_hit = 0.0;     // unwrapped, E_hit >= E_now
  double t_hit = 0.0;
  double x_impact = 0.0;
  double r = 0.0;         // |OP|
  double lambda = 0.0;    // tangent angle with the wall, in (0, pi)
  CartesianState state;   // incoming state at the wall (y == h)
};

struct CollisionEvent {
  int n = 0;
  double t = 0.0;
  double x_impact = 0.0;
  double r = 0.0;
  /// Angle of the incoming arc with the wall; the outgoing arc has pi - lambda.
  double lambda = 0.0;
  OrbitalElements pre;
  OrbitalElements post;

  double lambda_post() const { return kPi - lambda; }
};

struct InvariantReport {
  int n = 0;
  double A = 0.0;
  double R_eq16 = 0.0;           // a^2 + h alpha e sin(theta0)
  double R0 = 0.0;               // from (r, aM, lambda)
  double R_eq17 = 0.0;           // alpha/(2 aM) (h^2 + aM^2 - R0^2)
  double residual_identity = 0.0;
  double R0_center_pre = 0.0;    // |Q - C| before the collision
  double R0_center_post = 0.0;   // |Q - C| after the collision
  double R0_route_residual = 0.0;   // max disagreement among the R0 routes
  bool bounds_ok = false;
  bool identity_ok = false;
};

struct ConstantRCurve {
  struct Point {
    double x = 0.0;
    double lambda = 0.0;
    int branch = 0;  // 0: lambda <= pi/2, 1: mirror lambda >= pi/2
  };
  double A = 0.0;
  double R = 0.0;
  double x_max = 0.0;
  bool degenerate = false;  // R at its lower bound, curve on lambda in {0, pi}
  std::vector<Point> points;
};

struct AccessibleInterval {
  double x_min = 0.0;
  double x_max = 0.0;
  /// Half-width of the excluded middle when the centrifugal barrier keeps the
  /// particle off the foot Q of the wall; zero otherwise.
  double x_inner = 0.0;
};

/// a^2 + h alpha e sin(theta0).
double conserved_R(const OrbitalElements& el, const Params& p);
/// Distance from Q to the ellipse center from the impact geometry.
/// Throws DomainError unless 0 < r < 2 aM.
double R0_from_geometry(double r, double aM, double lambda);
/// |Q - C| with C = aM e (cos theta0, sin theta0), Q = (0, h).
double R0_from_center(const OrbitalElements& el, const Params& p);
/// alpha / (2 aM) (h^2 + aM^2 - R0^2).
double R_from_R0(double R0, double aM, const Params& p);
/// R evaluated at a wall point (x, lambda) for twice-energy A.
double R_at_wall_point(double x, double lambda, double A, const Params& p);

/// Earliest forward crossing of y = h with the particle moving toward the wall.
/// Returns nullopt if the ellipse stays below the wall. Throws GrazingContact
/// if the normal speed at the crossing is below tol_graze.
std::optional<WallCrossing> next_wall_crossing(const OrbitalElements& el, double E_now,
                                               double t_now, const Params& p);

/// Elastic reflection: p_y -> -p_y. Throws NotOnWall unless |y - h| < tol_event.
CartesianState reflect(const CartesianState& s, const Params& p);

struct StepResult {
  CartesianState state;  // on the wall, after reflection
  CollisionEvent event;
  double E_from = 0.0;   // eccentric anomalies bounding the arc on event.pre
  double E_to = 0.0;
};

/// Propagates to the next collision and reflects. Throws NoCollision,
/// GrazingContact, Unbound, Degenerate.
StepResult step(const CartesianState& s, const Params& p, int n = 0);

InvariantReport invariant_report(const CollisionEvent& ev, const Params& p);

struct RunOptions {
  int samples_per_arc = 32;  // 0 disables trajectory sampling
};

enum class RunStatus { Completed, NoCollision, Grazing };

struct RunResult {
  std::vector<CartesianState> samples;
  std::vector<CollisionEvent> events;
  std::vector<InvariantReport> reports;
  RunStatus status = RunStatus::Completed;
  std::string diagnostic;
};

/// n collisions from s0 (g must be 0). An orbit that never reaches the wall is
/// returned as one sampled Kepler revolution with status NoCollision; a
/// grazing contact stops the run with the events collected so far.
RunResult run(const CartesianState& s0, int n, const Params& p, const RunOptions& opts = {});

/// Wall section of the energy surface A: roots of A = g/(x^2+h^2) - alpha/sqrt(x^2+h^2).
/// Throws EmptyRegion when the surface does not reach the wall.
AccessibleInterval accessible_interval(double A, const Params& p);

/// Points of the (x, lambda) rectangle on which R is constant, traced on a
/// uniform grid of `grid` abscissae. Throws EmptyLevelSet.
ConstantRCurve level_set_R(double A, double R, const Params& p, int grid = 1000);

}  // namespace boltzmann::billiard
