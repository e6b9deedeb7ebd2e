#pragma once

// Action-angle bookkeeping for the collision map at fixed energy.
//
// At fixed L the conserved R defines a level curve in the (theta0, a) plane:
//   a^2 = R - h alpha sin(theta0) sqrt(1 - a^2 / L^2).
// Solving for a^2 gives two roots (eps = +-1) and a = eta sqrt(a^2). The angle
//   gamma = d/dR  int a d(psi)
// is the flow time of the auxiliary Hamiltonian R(a, theta0) along that curve,
// and M' = M + d/dL int a d(psi) is its partner.

#include <vector>

#include "boltzmann/billiard.hpp"
#include "boltzmann/types.hpp"

namespace boltzmann::delaunay {

struct BranchSpec {
  int eps = 1;
  int eta = 1;

  /// Throws DomainError unless both signs are exactly +-1.
  void validate() const;
};

/// One leg of an integration path: psi runs from `from` to `to` (either order)
/// on a fixed root of the level-curve equation.
struct BranchSegment {
  double from = 0.0;
  double to = 0.0;
  BranchSpec spec;
};

using BranchPath = std::vector<BranchSegment>;

/// Shape of a level curve R = const on the a > 0 sheet.
enum class LevelKind {
  Crossing,   // R <= h alpha: the curve reaches a = 0 (no sign-definite branch)
  Rotation,   // h alpha < R < L^2: theta0 sweeps the whole circle
  Libration,  // R >= L^2: theta0 oscillates between two turning points in (0, pi)
};

struct LevelCurve {
  LevelKind kind = LevelKind::Crossing;
  double R = 0.0;
  double L = 0.0;
  double psi_lo = 0.0;  // libration turning points
  double psi_hi = 0.0;
};

double a_branch(double theta0, double R, double L, BranchSpec spec, const Params& p);
double dadR_branch(double theta0, double R, double L, BranchSpec spec, const Params& p);
double dadL_branch(double theta0, double R, double L, BranchSpec spec, const Params& p);

/// int over the path of a(psi) d(psi): the theta0-part of the generating function.
double generating_integral(double R, double L, const BranchPath& path, const Params& p);
/// gamma = int over the path of da/dR d(psi). The path must be contiguous and
/// end at theta0.
double gamma_of(double theta0, double R, double L, const BranchPath& path, const Params& p);
/// M' = M + int over the path of da/dL d(psi).
double Mprime_of(double theta0, double M, double R, double L, const BranchPath& path,
                 const Params& p);

LevelCurve classify_level(double R, double L, const Params& p);
/// Path from the reference point of the curve (theta0 = 0, or the lower
/// turning point for librations) to (theta0, |a|), following the valid root.
/// eta is fixed to +1. Throws DomainError for Crossing curves.
BranchPath branch_path_to(double theta0, double abs_a, const LevelCurve& curve, const Params& p);
/// Flow time of one full circuit of the level curve.
double gamma_period(const LevelCurve& curve, const Params& p);

struct GammaSample {
  int n = 0;
  double gamma = 0.0;         // NaN for Crossing curves
  double delta2_gamma = 0.0;  // gamma_{n+2} - gamma_n, NaN when undefined
  int eps_observed = 1;       // sign of the post-collision angular momentum
  bool branch_mismatch = false;

  int parity() const { return n % 2; }
};

struct GammaSeries {
  double R = 0.0;
  double L = 0.0;
  double period = 0.0;  // NaN for Crossing curves
  LevelKind kind = LevelKind::Crossing;
  std::vector<GammaSample> samples;
};

/// gamma after every collision of a g = 0 run. A collision whose angular
/// momentum sign breaks the (-1)^n pattern is flagged, not fatal. Increments
/// are unwrapped modulo the period within each parity class.
GammaSeries gamma_series(const std::vector<billiard::CollisionEvent>& events, const Params& p);

struct OmegaEstimate {
  double omega = 0.0;  // mean increment over collisions leaving with a > 0
  double noise = 0.0;  // max deviation of those increments from the mean
  int count = 0;
};

OmegaEstimate estimate_omega(const GammaSeries& series);
/// Runs a fresh orbit on the level curve (L, R) for `collisions` collisions and
/// estimates omega from it.
OmegaEstimate omega_at(double L, double R, const Params& p, int collisions);

struct ConjectureReport {
  double R = 0.0;
  double L = 0.0;
  bool sign_alternation_ok = false;
  double spread_even = 0.0;  // (max - min) / |mean| of delta2_gamma, even n
  double spread_odd = 0.0;
  double omega_estimate = 0.0;
  double omega_noise = 0.0;
  double domega_dR = 0.0;
  int samples = 0;
};

/// Needs at least 100 samples (InsufficientData otherwise). d omega / dR comes
/// from reruns at R (1 +- 1e-4).
ConjectureReport conjecture_report(const GammaSeries& series, const Params& p,
                                   int rerun_collisions = 400);

}  // namespace boltzmann::delaunay
