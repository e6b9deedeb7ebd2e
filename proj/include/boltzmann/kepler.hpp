#pragma once

// Closed-form two-body mechanics for the g = 0 Hamiltonian
//   H = p^2/2 - alpha/(2r),
// i.e. a Kepler problem with gravitational parameter mu = alpha/2.
//
// Conventions:
//   A      twice the energy, A = p^2 - alpha/r (< 0 for bound orbits)
//   a      angular momentum x p_y - y p_x (sign gives the orientation)
//   theta0 polar angle of the aphelion, in [0, 2pi)
//   aM     semi-major axis -alpha/(2A)
//   L      Delaunay action -sqrt(alpha aM / 2) (negative by convention)
//
// Eccentric and true anomalies are measured from the perihelion in the
// direction of motion, so they increase with time for both orientations.

#include "boltzmann/types.hpp"

namespace boltzmann::kepler {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double dot(Vec2 u, Vec2 v) { return u.x * v.x + u.y * v.y; }

/// The ellipse (A, a, theta0) traced between two collisions.
struct OrbitalElements {
  double A = -1.0;
  double a = 0.0;
  double theta0 = 0.0;
  double alpha = 1.0;
  /// Stored rather than recomputed from (A, a): the eccentricity vector gives
  /// it without cancellation for nearly circular orbits.
  double e = 0.0;
  /// theta0 is undefined (set to 0) when the orbit is circular.
  bool circular = false;

  /// Builds elements from (A, a, theta0), deriving e = sqrt(1 + 4 A a^2 / alpha^2).
  /// Throws Unbound for A >= 0 and Degenerate for e >= 1 - tol_ecc.
  static OrbitalElements make(double A, double a, double theta0, double alpha);

  double semi_major_axis() const { return -alpha / (2.0 * A); }
  double semi_minor_axis() const;
  double delaunay_L() const;
  /// Orientation of the motion: +1 counter-clockwise, -1 clockwise.
  double orientation() const { return a >= 0.0 ? 1.0 : -1.0; }
  /// Center of the ellipse, aM e (cos theta0, sin theta0).
  Vec2 center() const;
  /// Unit vector from the focus toward the perihelion.
  Vec2 perihelion_direction() const;
  /// Unit vector completing the perifocal frame in the direction of motion.
  Vec2 motion_direction() const;
};

struct AnomalyTriple {
  double M = 0.0;
  double E = 0.0;
  double nu = 0.0;
};

struct DelaunayState {
  double L = 0.0;
  double a = 0.0;
  double M = 0.0;
  double theta0 = 0.0;
};

/// Osculating Kepler elements of a phase-space point. Any centrifugal term
/// in p is ignored. Throws Unbound if A >= 0, Degenerate if e >= 1 - tol_ecc
/// or r <= tol_geom. Circular orbits are flagged, not rejected.
OrbitalElements elements_from_cartesian(const CartesianState& s, const Params& p);

/// Point of the ellipse at true anomaly nu (t is set to 0).
CartesianState cartesian_from_elements(const OrbitalElements& el, double nu);

/// Newton iteration on Kepler's equation with a bisection safeguard.
/// Throws NoConvergence after max_iter iterations.
double solve_kepler(double M, double e, double tol = kTolKepler, int max_iter = 50);

double mean_from_eccentric(double E, double e);
double true_from_eccentric(double E, double e);
double eccentric_from_true(double nu, double e);
AnomalyTriple anomalies_from_mean(double M, double e);
AnomalyTriple anomalies_from_eccentric(double E, double e);

/// Mean motion alpha^2 / (4 L^3). Negative, following the L < 0 convention.
double mean_motion(const OrbitalElements& el);
/// Orbital period 2 pi / |mean motion|.
double period(const OrbitalElements& el);

/// Time needed to move from eccentric anomaly E_from to E_to (both unwrapped).
double time_to_anomaly(const OrbitalElements& el, double E_from, double E_to);

Vec2 position_at(const OrbitalElements& el, double E);
Vec2 velocity_at(const OrbitalElements& el, double E);
/// State at eccentric anomaly E, with time t.
CartesianState state_at(const OrbitalElements& el, double E, double t);
/// Eccentric anomaly of a point lying on the ellipse, in (-pi, pi].
double eccentric_anomaly_of(const OrbitalElements& el, Vec2 position);

/// Throws Degenerate for circular orbits (theta0 undefined).
DelaunayState delaunay_from_elements(const OrbitalElements& el, double nu);

}  // namespace boltzmann::kepler
