#include "boltzmann/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "boltzmann/quadrature.hpp"

namespace boltzmann::delaunay {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct RootEval {
  double c = 0.0;      // h alpha sin(psi)
  double q = 0.0;      // discriminant / c^2
  double a2 = 0.0;
  double da2_dR = 0.0;
  double da2_dL = 0.0;
};

// Root a^2(theta0) with the discriminant written as c^2 q, q = c^2/(4L^4) + 1 - R/L^2,
// which keeps the derivatives finite where sin(psi) vanishes.
RootEval eval_root(double psi, double R, double L, int eps, const Params& p) {
  RootEval ev;
  const double L2 = L * L;
  ev.c = p.h * p.alpha * std::sin(psi);
  const double c2 = ev.c * ev.c;
  const double abs_c = std::abs(ev.c);
  ev.q = c2 / (4.0 * L2 * L2) + 1.0 - R / L2;
  const double sq = std::sqrt(std::max(ev.q, 0.0));
  ev.a2 = R - c2 / (2.0 * L2) + eps * abs_c * sq;
  if (abs_c == 0.0) {
    ev.da2_dR = 1.0;
    ev.da2_dL = 0.0;
  } else {
    ev.da2_dR = 1.0 - eps * abs_c / (2.0 * L2 * sq);
    const double dq_dL = -c2 / (L2 * L2 * L) + 2.0 * R / (L2 * L);
    ev.da2_dL = c2 / (L2 * L) + eps * abs_c * dq_dL / (2.0 * sq);
  }
  return ev;
}

void check_L(double L) {
  if (!(L < 0.0) || !std::isfinite(L)) {
    throw Error(ErrorCode::DomainError, "L must be negative, got " + std::to_string(L));
  }
}

// Root of the squared equation that also solves the unsquared one.
RootEval checked_root(double theta0, double R, double L, BranchSpec spec, const Params& p) {
  spec.validate();
  check_L(L);
  RootEval ev = eval_root(theta0, R, L, spec.eps, p);
  const double L2 = L * L;
  if (ev.c * ev.c * ev.q < -1e-14 * std::max(1.0, R * R)) {
    throw Error(ErrorCode::BranchUnavailable, "negative discriminant at theta0=" +
                                                  std::to_string(theta0));
  }
  if (ev.a2 < -1e-14 * L2 || ev.a2 > L2 * (1.0 + 1e-14)) {
    throw Error(ErrorCode::BranchUnavailable, "a^2=" + std::to_string(ev.a2) + " outside [0, L^2]");
  }
  ev.a2 = std::clamp(ev.a2, 0.0, L2);
  const double residual = ev.a2 + ev.c * std::sqrt(1.0 - ev.a2 / L2) - R;
  if (std::abs(residual) > 1e-12 * std::max(1.0, std::abs(R))) {
    throw Error(ErrorCode::BranchUnavailable, "eps=" + std::to_string(spec.eps) +
                                                  " root is spurious at theta0=" +
                                                  std::to_string(theta0));
  }
  return ev;
}

void check_derivative(const RootEval& ev, double L) {
  const double L2 = L * L;
  if (ev.a2 <= 1e-14 * L2) throw Error(ErrorCode::SingularDerivative, "a = 0");
  if (ev.c != 0.0 && 2.0 * L2 * std::sqrt(std::max(ev.q, 0.0)) <= 1e-10 * std::abs(ev.c)) {
    throw Error(ErrorCode::SingularDerivative, "branch point (vanishing discriminant)");
  }
}

void check_path(double theta0, const BranchPath& path) {
  for (std::size_t i = 0; i < path.size(); ++i) {
    path[i].spec.validate();
    if (i + 1 < path.size() && std::abs(path[i].to - path[i + 1].from) > 1e-12) {
      throw Error(ErrorCode::DomainError, "branch path has a gap after segment " +
                                              std::to_string(i));
    }
  }
  if (path.empty()) {
    if (theta0 != 0.0) throw Error(ErrorCode::DomainError, "empty branch path");
    return;
  }
  if (std::abs(path.back().to - theta0) > 1e-12) {
    throw Error(ErrorCode::DomainError, "branch path does not end at theta0");
  }
}

// int_{from}^{to} f(psi) d psi with psi = m + d sin(t): removes the inverse
// square-root behaviour of the integrand at turning points of the curve.
template <typename F>
double integrate_segment(F f, double from, double to) {
  if (from == to) return 0.0;
  const double m = 0.5 * (from + to);
  const double d = 0.5 * (to - from);
  auto g = [&](double t) {
    const double ct = std::cos(t);
    if (ct <= 0.0) return 0.0;
    return f(m + d * std::sin(t)) * d * ct;
  };
  return quadrature::integrate(g, -0.5 * kPi, 0.5 * kPi, kTolQuad).value;
}

enum class Integrand { A, DaDR, DaDL };

double integrate_path(const BranchPath& path, double R, double L, const Params& p,
                      Integrand what) {
  check_L(L);
  double total = 0.0;
  for (const BranchSegment& seg : path) {
    const int eps = seg.spec.eps;
    const int eta = seg.spec.eta;
    auto f = [&](double psi) {
      const RootEval ev = eval_root(psi, R, L, eps, p);
      if (ev.q < 0.0 && ev.c != 0.0) return 0.0;
      const double abs_a = std::sqrt(std::max(ev.a2, 0.0));
      switch (what) {
        case Integrand::A: return eta * abs_a;
        case Integrand::DaDR: return abs_a > 0.0 ? eta * ev.da2_dR / (2.0 * abs_a) : 0.0;
        case Integrand::DaDL: return abs_a > 0.0 ? eta * ev.da2_dL / (2.0 * abs_a) : 0.0;
      }
      return 0.0;
    };
    total += integrate_segment(f, seg.from, seg.to);
  }
  return total;
}

}  // namespace

void BranchSpec::validate() const {
  if ((eps != 1 && eps != -1) || (eta != 1 && eta != -1)) {
    throw Error(ErrorCode::DomainError, "branch signs must be +-1");
  }
}

double a_branch(double theta0, double R, double L, BranchSpec spec, const Params& p) {
  const RootEval ev = checked_root(theta0, R, L, spec, p);
  return spec.eta * std::sqrt(ev.a2);
}

double dadR_branch(double theta0, double R, double L, BranchSpec spec, const Params& p) {
  const RootEval ev = checked_root(theta0, R, L, spec, p);
  check_derivative(ev, L);
  return spec.eta * ev.da2_dR / (2.0 * std::sqrt(ev.a2));
}

double dadL_branch(double theta0, double R, double L, BranchSpec spec, const Params& p) {
  const RootEval ev = checked_root(theta0, R, L, spec, p);
  check_derivative(ev, L);
  return spec.eta * ev.da2_dL / (2.0 * std::sqrt(ev.a2));
}

double generating_integral(double R, double L, const BranchPath& path, const Params& p) {
  return integrate_path(path, R, L, p, Integrand::A);
}

double gamma_of(double theta0, double R, double L, const BranchPath& path, const Params& p) {
  check_path(theta0, path);
  return integrate_path(path, R, L, p, Integrand::DaDR);
}

double Mprime_of(double theta0, double M, double R, double L, const BranchPath& path,
                 const Params& p) {
  check_path(theta0, path);
  return M + integrate_path(path, R, L, p, Integrand::DaDL);
}

LevelCurve classify_level(double R, double L, const Params& p) {
  check_L(L);
  LevelCurve curve;
  curve.R = R;
  curve.L = L;
  const double L2 = L * L;
  const double ha = p.h * p.alpha;
  if (R <= ha) {
    curve.kind = LevelKind::Crossing;
  } else if (R < L2) {
    curve.kind = LevelKind::Rotation;
  } else {
    curve.kind = LevelKind::Libration;
    // q(psi) = 0 where (h alpha sin psi)^2 = 4 L^2 (R - L^2).
    const double s = 2.0 * L2 * std::sqrt(R / L2 - 1.0) / ha;
    if (s > 1.0) throw Error(ErrorCode::EmptyLevelSet, "R above the top of the level family");
    curve.psi_lo = std::asin(s);
    curve.psi_hi = kPi - curve.psi_lo;
  }
  return curve;
}

BranchPath branch_path_to(double theta0, double abs_a, const LevelCurve& curve,
                          const Params& p) {
  const double th = wrap_two_pi(theta0);
  switch (curve.kind) {
    case LevelKind::Crossing:
      throw Error(ErrorCode::DomainError, "level curve reaches a = 0 (R <= h alpha)");
    case LevelKind::Rotation: {
      // Valid root: eps = -sign(sin psi); the roots swap where sin psi = 0.
      BranchPath path;
      path.push_back({0.0, std::min(th, kPi), {-1, 1}});
      if (th > kPi) path.push_back({kPi, th, {1, 1}});
      return path;
    }
    case LevelKind::Libration: {
      const double lo = curve.psi_lo;
      const double hi = curve.psi_hi;
      const double clamped = std::clamp(th, lo, hi);
      const RootEval minus = eval_root(clamped, curve.R, curve.L, -1, p);
      const RootEval plus = eval_root(clamped, curve.R, curve.L, 1, p);
      const double a2 = abs_a * abs_a;
      if (std::abs(minus.a2 - a2) <= std::abs(plus.a2 - a2)) {
        return {{lo, clamped, {-1, 1}}};
      }
      return {{lo, hi, {-1, 1}}, {hi, clamped, {1, 1}}};
    }
  }
  return {};
}

double gamma_period(const LevelCurve& curve, const Params& p) {
  switch (curve.kind) {
    case LevelKind::Crossing:
      throw Error(ErrorCode::DomainError, "level curve reaches a = 0 (R <= h alpha)");
    case LevelKind::Rotation:
      return integrate_path({{0.0, kPi, {-1, 1}}, {kPi, kTwoPi, {1, 1}}}, curve.R, curve.L, p,
                            Integrand::DaDR);
    case LevelKind::Libration:
      return integrate_path({{curve.psi_lo, curve.psi_hi, {-1, 1}},
                             {curve.psi_hi, curve.psi_lo, {1, 1}}},
                            curve.R, curve.L, p, Integrand::DaDR);
  }
  return kNaN;
}

GammaSeries gamma_series(const std::vector<billiard::CollisionEvent>& events, const Params& p) {
  GammaSeries series;
  if (events.empty()) return series;
  const kepler::OrbitalElements& first = events.front().post;
  series.R = billiard::conserved_R(first, p);
  series.L = first.delaunay_L();
  const LevelCurve curve = classify_level(series.R, series.L, p);
  series.kind = curve.kind;
  const bool defined = curve.kind != LevelKind::Crossing;
  series.period = defined ? gamma_period(curve, p) : kNaN;

  const int sign0 = first.a >= 0.0 ? 1 : -1;
  series.samples.reserve(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    const kepler::OrbitalElements& el = events[i].post;
    GammaSample s;
    s.n = static_cast<int>(i);
    s.eps_observed = el.a >= 0.0 ? 1 : -1;
    const int expected = (i % 2 == 0) ? sign0 : -sign0;
    s.branch_mismatch = s.eps_observed != expected;
    if (defined) {
      const BranchPath path = branch_path_to(el.theta0, std::abs(el.a), curve, p);
      s.gamma = integrate_path(path, series.R, series.L, p, Integrand::DaDR);
    } else {
      s.gamma = kNaN;
    }
    s.delta2_gamma = kNaN;
    series.samples.push_back(s);
  }

  if (!defined) return series;
  const double T = series.period;
  double previous[2] = {kNaN, kNaN};
  for (std::size_t i = 0; i + 2 < series.samples.size(); ++i) {
    double d = series.samples[i + 2].gamma - series.samples[i].gamma;
    const int parity = static_cast<int>(i % 2);
    if (std::isnan(previous[parity])) {
      d -= T * std::floor(d / T);
    } else {
      d -= T * std::round((d - previous[parity]) / T);
    }
    previous[parity] = d;
    series.samples[i].delta2_gamma = d;
  }
  return series;
}

OmegaEstimate estimate_omega(const GammaSeries& series) {
  OmegaEstimate est;
  double sum = 0.0;
  for (const GammaSample& s : series.samples) {
    if (s.eps_observed > 0 && std::isfinite(s.delta2_gamma)) {
      sum += s.delta2_gamma;
      ++est.count;
    }
  }
  if (est.count == 0) throw Error(ErrorCode::InsufficientData, "no increments with a > 0");
  est.omega = sum / est.count;
  for (const GammaSample& s : series.samples) {
    if (s.eps_observed > 0 && std::isfinite(s.delta2_gamma)) {
      est.noise = std::max(est.noise, std::abs(s.delta2_gamma - est.omega));
    }
  }
  return est;
}

OmegaEstimate omega_at(double L, double R, const Params& p, int collisions) {
  check_L(L);
  const double A = -p.alpha * p.alpha / (4.0 * L * L);
  // theta0 = pi/2 lies on the eps = -1 root for both rotations and librations;
  // the aphelion then points at the wall and the perihelion sits below it.
  const double a = a_branch(0.5 * kPi, R, L, {-1, 1}, p);
  const auto el = kepler::OrbitalElements::make(A, a, 0.5 * kPi, p.alpha);
  const CartesianState s0 = kepler::cartesian_from_elements(el, 0.0);
  billiard::RunOptions opts;
  opts.samples_per_arc = 0;
  const billiard::RunResult res = billiard::run(s0, collisions, p, opts);
  if (res.status != billiard::RunStatus::Completed) {
    throw Error(ErrorCode::NoCollision, "rerun at R=" + std::to_string(R) + ": " + res.diagnostic);
  }
  return estimate_omega(gamma_series(res.events, p));
}

ConjectureReport conjecture_report(const GammaSeries& series, const Params& p,
                                   int rerun_collisions) {
  if (series.samples.size() < 100) {
    throw Error(ErrorCode::InsufficientData,
                std::to_string(series.samples.size()) + " samples, need at least 100");
  }
  if (series.kind == LevelKind::Crossing) {
    throw Error(ErrorCode::DomainError, "conjecture report needs R > h alpha");
  }
  ConjectureReport rep;
  rep.R = series.R;
  rep.L = series.L;
  rep.samples = static_cast<int>(series.samples.size());
  rep.sign_alternation_ok =
      std::none_of(series.samples.begin(), series.samples.end(),
                   [](const GammaSample& s) { return s.branch_mismatch; });

  auto spread = [&](int parity) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double sum = 0.0;
    int count = 0;
    for (const GammaSample& s : series.samples) {
      if (s.parity() != parity || !std::isfinite(s.delta2_gamma)) continue;
      lo = std::min(lo, s.delta2_gamma);
      hi = std::max(hi, s.delta2_gamma);
      sum += s.delta2_gamma;
      ++count;
    }
    if (count == 0) return kNaN;
    return (hi - lo) / std::abs(sum / count);
  };
  rep.spread_even = spread(0);
  rep.spread_odd = spread(1);

  const OmegaEstimate own = estimate_omega(series);
  rep.omega_estimate = own.omega;
  rep.omega_noise = own.noise;
  const double dR = 1e-4 * series.R;
  const double up = omega_at(series.L, series.R + dR, p, rerun_collisions).omega;
  const double down = omega_at(series.L, series.R - dR, p, rerun_collisions).omega;
  rep.domega_dR = (up - down) / (2.0 * dR);
  return rep;
}

}  // namespace boltzmann::delaunay
