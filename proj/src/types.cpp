#include "boltzmann/types.hpp"

#include <cmath>

namespace boltzmann {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::Unbound: return "Unbound";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NoCollision: return "NoCollision";
    case ErrorCode::GrazingContact: return "GrazingContact";
    case ErrorCode::NotOnWall: return "NotOnWall";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::EmptyLevelSet: return "EmptyLevelSet";
    case ErrorCode::BranchUnavailable: return "BranchUnavailable";
    case ErrorCode::SingularDerivative: return "SingularDerivative";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::EscapeDetected: return "EscapeDetected";
    case ErrorCode::StepFailure: return "StepFailure";
  }
  return "Unknown";
}

void Params::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::InvalidParams, "alpha must be > 0");
  }
  if (!(g >= 0.0) || !std::isfinite(g)) {
    throw Error(ErrorCode::InvalidParams, "g must be >= 0");
  }
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw Error(ErrorCode::InvalidParams, "h must be > 0");
  }
}

double CartesianState::radius() const { return std::hypot(x, y); }

double twice_energy(const CartesianState& s, const Params& p) {
  const double r = s.radius();
  return s.speed_squared() - p.alpha / r + p.g / (r * r);
}

double wrap_two_pi(double angle) {
  double w = std::fmod(angle, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

}  // namespace boltzmann
