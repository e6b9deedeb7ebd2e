#pragma once

#include <numbers>
#include <stdexcept>
#include <string>

namespace boltzmann {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Numerical thresholds shared by the modules.
inline constexpr double kTolEcc = 1e-12;        // circular / rectilinear cutoffs
inline constexpr double kTolGeom = 1e-12;       // wall and center proximity
inline constexpr double kTolKepler = 1e-14;     // |E - e sin E - M|
inline constexpr double kTolEvent = 1e-12;      // |y - h| at a located collision
inline constexpr double kTolGraze = 1e-10;      // minimum normal speed at impact
inline constexpr double kTolLevel = 1e-10;      // level-set residual in R
inline constexpr double kTolQuad = 1e-11;       // absolute quadrature tolerance

enum class ErrorCode {
  InvalidParams,
  Unbound,
  Degenerate,
  NoConvergence,
  NoCollision,
  GrazingContact,
  NotOnWall,
  DomainError,
  EmptyRegion,
  EmptyLevelSet,
  BranchUnavailable,
  SingularDerivative,
  QuadratureFailure,
  InsufficientData,
  EscapeDetected,
  StepFailure,
};

const char* to_string(ErrorCode code);

/// Error raised by every numerical routine in the library. The code names the
/// failure class; the message carries the context.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

/// Physical constants of the billiard: H = p^2/2 - alpha/(2r) + g/(2r^2),
/// wall on the line y = h.
struct Params {
  double alpha = 1.0;
  double g = 0.0;
  double h = 1.0;

  /// Throws InvalidParams unless alpha > 0, g >= 0, h > 0.
  void validate() const;
};

struct CartesianState {
  double x = 0.0;
  double y = 0.0;
  double px = 0.0;
  double py = 0.0;
  double t = 0.0;

  double radius() const;
  double speed_squared() const { return px * px + py * py; }
  /// x p_y - y p_x
  double angular_momentum() const { return x * py - y * px; }
};

/// Twice the Hamiltonian: A = p^2 - alpha/r + g/r^2.
double twice_energy(const CartesianState& s, const Params& p);

/// Wraps an angle into [0, 2pi).
double wrap_two_pi(double angle);

}  // namespace boltzmann
