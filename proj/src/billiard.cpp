#include "boltzmann/billiard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace boltzmann::billiard {

using kepler::Vec2;

double conserved_R(const OrbitalElements& el, const Params& p) {
  return el.a * el.a + p.h * p.alpha * el.e * std::sin(el.theta0);
}

double R0_from_geometry(double r, double aM, double lambda) {
  if (!(r > 0.0 && r < 2.0 * aM)) {
    throw Error(ErrorCode::DomainError,
                "need 0 < r < 2 aM, got r=" + std::to_string(r) + " aM=" + std::to_string(aM));
  }
  const double s = 2.0 * aM - r;
  const double sq = 0.25 * r * r + 0.25 * s * s + 0.5 * r * s * std::cos(2.0 * lambda);
  return std::sqrt(std::max(0.0, sq));
}

double R0_from_center(const OrbitalElements& el, const Params& p) {
  const Vec2 c = el.center();
  return std::hypot(c.x, p.h - c.y);
}

double R_from_R0(double R0, double aM, const Params& p) {
  return p.alpha / (2.0 * aM) * (p.h * p.h + aM * aM - R0 * R0);
}

double R_at_wall_point(double x, double lambda, double A, const Params& p) {
  const double aM = -p.alpha / (2.0 * A);
  const double r = std::hypot(x, p.h);
  return R_from_R0(R0_from_geometry(r, aM, lambda), aM, p);
}

std::optional<WallCrossing> next_wall_crossing(const OrbitalElements& el, double E_now,
                                               double t_now, const Params& p) {
  // y(E) = Kc cos E + Ks sin E - aM e P_y = K cos(E - phi) + y0
  const double aM = el.semi_major_axis();
  const Vec2 P = el.perihelion_direction();
  const Vec2 Q = el.motion_direction();
  const double Kc = aM * P.y;
  const double Ks = el.semi_minor_axis() * Q.y;
  const double K = std::hypot(Kc, Ks);
  const double y0 = -aM * el.e * P.y;
  if (K + y0 < p.h) return std::nullopt;

  const double phi = std::atan2(Ks, Kc);
  const double c = std::clamp((p.h - y0) / K, -1.0, 1.0);
  // Upward crossing: dy/dE = -K sin(E - phi) > 0, i.e. E - phi = -acos(c).
  const double E_up = phi - std::acos(c);
  double dE = wrap_two_pi(E_up - E_now);
  // A crossing a hair behind E_now is the current point itself.
  if (kTwoPi - dE < 1e-10) dE = 0.0;
  double E_hit = E_now + dE;

  // Polish against the parametrization actually used for the state.
  for (int it = 0; it < 3; ++it) {
    const double f = kepler::position_at(el, E_hit).y - p.h;
    const double fp = -K * std::sin(E_hit - phi);
    if (fp == 0.0) break;
    const double next = E_hit - f / fp;
    if (std::abs(next - E_hit) < 1e-16) break;
    if (std::abs(kepler::position_at(el, next).y - p.h) >= std::abs(f)) break;
    E_hit = next;
  }

  const Vec2 q = kepler::position_at(el, E_hit);
  const Vec2 v = kepler::velocity_at(el, E_hit);
  if (!(v.y > kTolGraze)) {
    throw Error(ErrorCode::GrazingContact,
                "normal speed " + std::to_string(v.y) + " at x=" + std::to_string(q.x));
  }

  WallCrossing w;
  w.E_hit = E_hit;
  w.t_hit = t_now + kepler::time_to_anomaly(el, E_now, E_hit);
  w.x_impact = q.x;
  w.r = std::hypot(q.x, p.h);
  // The counter-clockwise tangent is +-v; its angle modulo pi is that of v,
  // which lies in (0, pi) because v_y > 0.
  w.lambda = std::atan2(v.y, v.x);
  w.state = {q.x, p.h, v.x, v.y, w.t_hit};
  return w;
}

CartesianState reflect(const CartesianState& s, const Params& p) {
  if (!(std::abs(s.y - p.h) < kTolEvent)) {
    throw Error(ErrorCode::NotOnWall, "y - h = " + std::to_string(s.y - p.h));
  }
  CartesianState out = s;
  out.py = -s.py;
  return out;
}

StepResult step(const CartesianState& s, const Params& p, int n) {
  if (p.g != 0.0) throw Error(ErrorCode::DomainError, "event-driven propagation needs g = 0");
  if (s.y > p.h + kTolGeom) throw Error(ErrorCode::DomainError, "state beyond the wall");

  const OrbitalElements pre = kepler::elements_from_cartesian(s, p);
  const double E_now = kepler::eccentric_anomaly_of(pre, {s.x, s.y});
  const auto hit = next_wall_crossing(pre, E_now, s.t, p);
  if (!hit) {
    throw Error(ErrorCode::NoCollision, "ellipse stays below the wall (collision " +
                                            std::to_string(n) + ")");
  }

  StepResult out;
  out.state = reflect(hit->state, p);
  out.event.n = n;
  out.event.t = hit->t_hit;
  out.event.x_impact = hit->x_impact;
  out.event.r = hit->r;
  out.event.lambda = hit->lambda;
  out.event.pre = pre;
  out.event.post = kepler::elements_from_cartesian(out.state, p);
  out.E_from = E_now;
  out.E_to = hit->E_hit;
  return out;
}

InvariantReport invariant_report(const CollisionEvent& ev, const Params& p) {
  InvariantReport rep;
  const double aM = ev.pre.semi_major_axis();
  rep.n = ev.n;
  rep.A = ev.pre.A;
  rep.R_eq16 = conserved_R(ev.pre, p);
  rep.R0 = R0_from_geometry(ev.r, aM, ev.lambda);
  rep.R_eq17 = R_from_R0(rep.R0, aM, p);
  rep.residual_identity = std::abs(rep.R_eq16 - rep.R_eq17);
  rep.R0_center_pre = R0_from_center(ev.pre, p);
  rep.R0_center_post = R0_from_center(ev.post, p);
  const double R0_post = R0_from_geometry(ev.r, ev.post.semi_major_axis(), ev.lambda_post());
  rep.R0_route_residual = std::max({std::abs(rep.R0 - rep.R0_center_pre),
                                 std::abs(R0_post - rep.R0_center_post),
                                 std::abs(rep.R0_center_pre - rep.R0_center_post)});
  rep.identity_ok = rep.residual_identity <= 1e-10 * std::max(1.0, std::abs(rep.R_eq16));

  const double R = rep.R_eq16;
  const double R0sq = rep.R0 * rep.R0;
  const double scale = p.alpha * p.h * p.h / (2.0 * aM);
  const double k = aM / p.h - ev.r / p.h;
  const double upper = (1.0 + aM * aM / (p.h * p.h) - k * k) * scale;
  rep.bounds_ok = ev.r < 2.0 * aM && R0sq > (aM - ev.r) * (aM - ev.r) && R0sq < aM * aM &&
                  scale < R && R < upper;
  return rep;
}

namespace {

// `count` points strictly inside (E0, E1).
void sample_arc(const OrbitalElements& el, double E0, double E1, double t0, int count,
                std::vector<CartesianState>& out) {
  for (int k = 1; k <= count; ++k) {
    const double E = E0 + (E1 - E0) * k / (count + 1);
    out.push_back(kepler::state_at(el, E, t0 + kepler::time_to_anomaly(el, E0, E)));
  }
}

}  // namespace

RunResult run(const CartesianState& s0, int n, const Params& p, const RunOptions& opts) {
  p.validate();
  if (n < 0) throw Error(ErrorCode::DomainError, "negative collision count");
  RunResult res;
  res.samples.push_back(s0);
  res.events.reserve(static_cast<std::size_t>(n));
  res.reports.reserve(static_cast<std::size_t>(n));

  CartesianState s = s0;
  for (int i = 0; i < n; ++i) {
    StepResult st;
    try {
      st = step(s, p, i);
    } catch (const Error& err) {
      if (err.code() == ErrorCode::NoCollision) {
        res.status = RunStatus::NoCollision;
        res.diagnostic = err.what();
        if (opts.samples_per_arc > 0) {
          const OrbitalElements el = kepler::elements_from_cartesian(s, p);
          const double E0 = kepler::eccentric_anomaly_of(el, {s.x, s.y});
          sample_arc(el, E0, E0 + kTwoPi, s.t, std::max(opts.samples_per_arc, 64), res.samples);
        }
        return res;
      }
      if (err.code() == ErrorCode::GrazingContact) {
        res.status = RunStatus::Grazing;
        res.diagnostic = "collision " + std::to_string(i) + ": " + err.what();
        return res;
      }
      throw Error(err.code(), "collision " + std::to_string(i) + ": " + err.detail());
    }
    if (opts.samples_per_arc > 0) {
      sample_arc(st.event.pre, st.E_from, st.E_to, s.t, opts.samples_per_arc - 1, res.samples);
      CartesianState incoming = st.state;
      incoming.py = -incoming.py;
      res.samples.push_back(incoming);
      res.samples.push_back(st.state);
    }
    res.reports.push_back(invariant_report(st.event, p));
    res.events.push_back(st.event);
    s = st.state;
  }
  return res;
}

AccessibleInterval accessible_interval(double A, const Params& p) {
  p.validate();
  if (!(A < 0.0)) throw Error(ErrorCode::DomainError, "accessible interval needs A < 0");
  // With u = 1/sqrt(x^2 + h^2) the accessible set is g u^2 - alpha u - A <= 0.
  double u_outer = 0.0;
  double u_inner = std::numeric_limits<double>::infinity();
  if (p.g == 0.0) {
    u_outer = -A / p.alpha;
  } else {
    const double disc = p.alpha * p.alpha + 4.0 * p.g * A;
    if (disc < 0.0) throw Error(ErrorCode::EmptyRegion, "energy below the effective potential");
    const double sq = std::sqrt(disc);
    u_outer = -2.0 * A / (p.alpha + sq);
    u_inner = (p.alpha + sq) / (2.0 * p.g);
  }
  const double u_wall = 1.0 / p.h;
  if (u_outer > u_wall) {
    throw Error(ErrorCode::EmptyRegion, "energy surface does not reach the wall");
  }
  AccessibleInterval iv;
  const double r_outer = 1.0 / u_outer;
  iv.x_max = std::sqrt(std::max(0.0, r_outer * r_outer - p.h * p.h));
  iv.x_min = -iv.x_max;
  if (u_inner < u_wall) {
    const double r_inner = 1.0 / u_inner;
    iv.x_inner = std::sqrt(std::max(0.0, r_inner * r_inner - p.h * p.h));
  }
  return iv;
}

ConstantRCurve level_set_R(double A, double R, const Params& p, int grid) {
  if (grid < 1) throw Error(ErrorCode::DomainError, "grid must be positive");
  const double aM = -p.alpha / (2.0 * A);
  const double lower = p.alpha * p.h * p.h / (2.0 * aM);
  const double R0sq = p.h * p.h + aM * aM - 2.0 * aM * R / p.alpha;
  if (R < lower - kTolLevel || R0sq < 0.0) {
    throw Error(ErrorCode::EmptyLevelSet, "R=" + std::to_string(R) + " outside the admissible box");
  }

  ConstantRCurve curve;
  curve.A = A;
  curve.R = R;
  Params p0 = p;
  p0.g = 0.0;
  curve.x_max = accessible_interval(A, p0).x_max;
  curve.degenerate = std::abs(R - lower) <= kTolLevel;

  std::vector<ConstantRCurve::Point> upper;
  for (int i = 0; i < grid; ++i) {
    const double x = -curve.x_max + 2.0 * curve.x_max * (i + 1) / (grid + 1);
    const double r = std::hypot(x, p.h);
    const double s = 2.0 * aM - r;
    const double c = (4.0 * R0sq - r * r - s * s) / (2.0 * r * s);
    if (c > 1.0 + 1e-12 || c < -1.0 - 1e-12) continue;
    const double lam = 0.5 * std::acos(std::clamp(c, -1.0, 1.0));
    curve.points.push_back({x, lam, 0});
    upper.push_back({x, kPi - lam, 1});
  }
  if (curve.points.empty()) {
    throw Error(ErrorCode::EmptyLevelSet, "no wall point carries R=" + std::to_string(R));
  }
  // Lower branch left to right, then the mirror branch right to left.
  curve.points.insert(curve.points.end(), upper.rbegin(), upper.rend());
  return curve;
}

}  // namespace boltzmann::billiard
