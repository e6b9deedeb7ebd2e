#include "boltzmann/kepler.hpp"

#include <cmath>
#include <string>

namespace boltzmann::kepler {

namespace {

void require_elliptic(const OrbitalElements& el) {
  if (!(el.A < 0.0)) throw Error(ErrorCode::Unbound, "A = " + std::to_string(el.A));
  if (!(el.e < 1.0 - kTolEcc)) {
    throw Error(ErrorCode::Degenerate, "eccentricity " + std::to_string(el.e) + " not elliptic");
  }
}

}  // namespace

OrbitalElements OrbitalElements::make(double A, double a, double theta0, double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidParams, "alpha must be > 0");
  OrbitalElements el;
  el.A = A;
  el.a = a;
  el.alpha = alpha;
  el.theta0 = wrap_two_pi(theta0);
  el.e = std::sqrt(std::max(0.0, 1.0 + 4.0 * A * a * a / (alpha * alpha)));
  require_elliptic(el);
  if (el.e < kTolEcc) {
    el.e = 0.0;
    el.circular = true;
  }
  return el;
}

double OrbitalElements::semi_minor_axis() const {
  return semi_major_axis() * std::sqrt((1.0 - e) * (1.0 + e));
}

double OrbitalElements::delaunay_L() const {
  return -std::sqrt(alpha * semi_major_axis() / 2.0);
}

Vec2 OrbitalElements::center() const {
  const double d = semi_major_axis() * e;
  return {d * std::cos(theta0), d * std::sin(theta0)};
}

Vec2 OrbitalElements::perihelion_direction() const {
  return {-std::cos(theta0), -std::sin(theta0)};
}

Vec2 OrbitalElements::motion_direction() const {
  const Vec2 p = perihelion_direction();
  const double s = orientation();
  return {-s * p.y, s * p.x};
}

OrbitalElements elements_from_cartesian(const CartesianState& s, const Params& p) {
  const double r = s.radius();
  if (!(r > kTolGeom)) throw Error(ErrorCode::Degenerate, "state at the attracting center");

  OrbitalElements el;
  el.alpha = p.alpha;
  el.A = s.speed_squared() - p.alpha / r;
  if (!(el.A < 0.0)) throw Error(ErrorCode::Unbound, "A = " + std::to_string(el.A));
  el.a = s.angular_momentum();

  // Eccentricity vector (points at the perihelion); mu = alpha / 2.
  const double inv_mu = 2.0 / p.alpha;
  const double ex = el.a * s.py * inv_mu - s.x / r;
  const double ey = -el.a * s.px * inv_mu - s.y / r;
  el.e = std::hypot(ex, ey);
  if (!(el.e < 1.0 - kTolEcc)) {
    throw Error(ErrorCode::Degenerate, "eccentricity " + std::to_string(el.e) + " not elliptic");
  }
  if (el.e < kTolEcc) {
    el.e = 0.0;
    el.theta0 = 0.0;
    el.circular = true;
  } else {
    el.theta0 = wrap_two_pi(std::atan2(-ey, -ex));
  }
  return el;
}

CartesianState cartesian_from_elements(const OrbitalElements& el, double nu) {
  require_elliptic(el);
  const double aM = el.semi_major_axis();
  const double semi_latus = aM * (1.0 - el.e) * (1.0 + el.e);
  const double r = semi_latus / (1.0 + el.e * std::cos(nu));
  const Vec2 P = el.perihelion_direction();
  const Vec2 Q = el.motion_direction();
  const double c = std::cos(nu);
  const double sn = std::sin(nu);
  const double vscale = std::sqrt(el.alpha / (2.0 * semi_latus));

  CartesianState s;
  s.x = r * (c * P.x + sn * Q.x);
  s.y = r * (c * P.y + sn * Q.y);
  s.px = vscale * (-sn * P.x + (el.e + c) * Q.x);
  s.py = vscale * (-sn * P.y + (el.e + c) * Q.y);
  s.t = 0.0;
  return s;
}

double solve_kepler(double M, double e, double tol, int max_iter) {
  if (!(e >= 0.0 && e < 1.0)) {
    throw Error(ErrorCode::DomainError, "eccentricity " + std::to_string(e) + " outside [0, 1)");
  }
  const double turns = std::floor(M / kTwoPi);
  const double m = M - turns * kTwoPi;
  if (e == 0.0) return M;

  // f(E) = E - e sin E - m is increasing and its root lies in [m - e, m + e].
  double lo = m - e;
  double hi = m + e;
  double E = m + e * std::sin(m);
  for (int it = 0; it < max_iter; ++it) {
    const double f = E - e * std::sin(E) - m;
    if (std::abs(f) <= tol) return E + turns * kTwoPi;
    if (f > 0.0) {
      hi = E;
    } else {
      lo = E;
    }
    double next = E - f / (1.0 - e * std::cos(E));
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == E) break;
    E = next;
  }
  const double f = E - e * std::sin(E) - m;
  if (std::abs(f) <= tol) return E + turns * kTwoPi;
  throw Error(ErrorCode::NoConvergence,
              "Kepler solver M=" + std::to_string(M) + " e=" + std::to_string(e));
}

double mean_from_eccentric(double E, double e) { return E - e * std::sin(E); }

double true_from_eccentric(double E, double e) {
  const double nu = std::atan2(std::sqrt((1.0 - e) * (1.0 + e)) * std::sin(E), std::cos(E) - e);
  // keep the same winding as E
  return nu + kTwoPi * std::round((E - nu) / kTwoPi);
}

double eccentric_from_true(double nu, double e) {
  const double E = std::atan2(std::sqrt((1.0 - e) * (1.0 + e)) * std::sin(nu), e + std::cos(nu));
  return E + kTwoPi * std::round((nu - E) / kTwoPi);
}

AnomalyTriple anomalies_from_mean(double M, double e) {
  const double E = solve_kepler(M, e);
  return {M, E, true_from_eccentric(E, e)};
}

AnomalyTriple anomalies_from_eccentric(double E, double e) {
  return {mean_from_eccentric(E, e), E, true_from_eccentric(E, e)};
}

double mean_motion(const OrbitalElements& el) {
  const double L = el.delaunay_L();
  return el.alpha * el.alpha / (4.0 * L * L * L);
}

double period(const OrbitalElements& el) { return kTwoPi / std::abs(mean_motion(el)); }

double time_to_anomaly(const OrbitalElements& el, double E_from, double E_to) {
  require_elliptic(el);
  const double dM = mean_from_eccentric(E_to, el.e) - mean_from_eccentric(E_from, el.e);
  return dM / std::abs(mean_motion(el));
}

Vec2 position_at(const OrbitalElements& el, double E) {
  const double aM = el.semi_major_axis();
  const double b = el.semi_minor_axis();
  const Vec2 P = el.perihelion_direction();
  const Vec2 Q = el.motion_direction();
  const double u = aM * (std::cos(E) - el.e);
  const double w = b * std::sin(E);
  return {u * P.x + w * Q.x, u * P.y + w * Q.y};
}

Vec2 velocity_at(const OrbitalElements& el, double E) {
  const double aM = el.semi_major_axis();
  const double b = el.semi_minor_axis();
  const Vec2 P = el.perihelion_direction();
  const Vec2 Q = el.motion_direction();
  const double Edot = std::abs(mean_motion(el)) / (1.0 - el.e * std::cos(E));
  const double u = -aM * std::sin(E) * Edot;
  const double w = b * std::cos(E) * Edot;
  return {u * P.x + w * Q.x, u * P.y + w * Q.y};
}

CartesianState state_at(const OrbitalElements& el, double E, double t) {
  const Vec2 q = position_at(el, E);
  const Vec2 v = velocity_at(el, E);
  return {q.x, q.y, v.x, v.y, t};
}

double eccentric_anomaly_of(const OrbitalElements& el, Vec2 position) {
  const double aM = el.semi_major_axis();
  const double b = el.semi_minor_axis();
  const double u = dot(position, el.perihelion_direction());
  const double w = dot(position, el.motion_direction());
  return std::atan2(w / b, u / aM + el.e);
}

DelaunayState delaunay_from_elements(const OrbitalElements& el, double nu) {
  require_elliptic(el);
  if (el.circular || el.e <= kTolEcc) {
    throw Error(ErrorCode::Degenerate, "circular orbit: aphelion argument undefined");
  }
  const double E = eccentric_from_true(nu, el.e);
  return {el.delaunay_L(), el.a, wrap_two_pi(mean_from_eccentric(E, el.e)), el.theta0};
}

}  // namespace boltzmann::kepler
