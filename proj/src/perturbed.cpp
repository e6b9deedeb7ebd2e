#include "boltzmann/perturbed.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <thread>

#include <boost/numeric/odeint.hpp>

#include "boltzmann/billiard.hpp"
#include "boltzmann/kepler.hpp"

namespace boltzmann::perturbed {

namespace odeint = boost::numeric::odeint;

namespace {

// Levi-Civita variables: z = x + iy = u^2, w = 2 conj(u) (px + i py), and the
// fictitious time s with dt = r ds. Layout: u1, u2, w1, w2, t. At g = 0 the
// arc is a harmonic oscillator in u, so close passes by the center cost
// nothing in accuracy.
using Phase = std::array<double, 5>;
using Stepper = odeint::runge_kutta_fehlberg78<Phase>;

struct Field {
  double alpha;
  double g;
  double energy;  // H on the arc; the flow stays on r (H - energy) = 0

  void operator()(const Phase& z, Phase& dz, double /*s*/) const {
    const double r = z[0] * z[0] + z[1] * z[1];
    const double k = 2.0 * energy + g / (r * r);
    dz[0] = 0.25 * z[2];
    dz[1] = 0.25 * z[3];
    dz[2] = k * z[0];
    dz[3] = k * z[1];
    dz[4] = r;
  }
};

Phase to_phase(const CartesianState& s) {
  const std::complex<double> u = std::sqrt(std::complex<double>(s.x, s.y));
  const std::complex<double> w = 2.0 * std::conj(u) * std::complex<double>(s.px, s.py);
  return {u.real(), u.imag(), w.real(), w.imag(), s.t};
}

CartesianState to_state(const Phase& z) {
  const std::complex<double> u(z[0], z[1]);
  const std::complex<double> w(z[2], z[3]);
  const std::complex<double> q = u * u;
  const std::complex<double> P = w * u / (2.0 * std::norm(u));
  return {q.real(), q.imag(), P.real(), P.imag(), z[4]};
}

double radius(const Phase& z) { return z[0] * z[0] + z[1] * z[1]; }
double wall_height(const Phase& z) { return 2.0 * z[0] * z[1]; }
// d y / d s
double wall_rate(const Phase& z) { return 0.5 * (z[2] * z[1] + z[0] * z[3]); }

double energy_of(const Phase& z, const Params& p) { return hamiltonian(to_state(z), p); }

// Drives a controlled RKF78 stepper one accepted step at a time.
class Integrator {
 public:
  Integrator(const Params& p, double energy, const IntegratorConfig& cfg)
      : field_{p.alpha, p.g, energy},
        cfg_(cfg),
        controlled_(odeint::make_controlled(cfg.abs_tol, cfg.rel_tol, Stepper())) {}

  // Advances z by one accepted step in s no longer than |limit|; returns the step.
  double advance(Phase& z, double& ds, double limit) {
    int rejects = 0;
    double s = 0.0;
    for (;;) {
      double h = std::copysign(std::min({std::abs(ds), cfg_.max_step, std::abs(limit)}), limit);
      if (controlled_.try_step(field_, z, s, h) == odeint::success) {
        ds = h;
        const double r = radius(z);
        if (r < cfg_.min_radius) {
          throw Error(ErrorCode::StepFailure,
                      "singularity guard: r=" + std::to_string(r) + " at t=" + std::to_string(z[4]));
        }
        if (r > cfg_.escape_radius) {
          throw Error(ErrorCode::EscapeDetected, "r=" + std::to_string(r));
        }
        return s;
      }
      ds = h;
      if (++rejects > 200 || std::abs(ds) < 1e-15) {
        throw Error(ErrorCode::StepFailure, "step size underflow at t=" + std::to_string(z[4]));
      }
    }
  }

  // Single uncontrolled step from z over tau (used inside an accepted step).
  Phase single_step(const Phase& z, double tau) {
    Phase out = z;
    plain_.do_step(field_, out, 0.0, tau);
    return out;
  }

 private:
  Field field_;
  IntegratorConfig cfg_;
  odeint::controlled_runge_kutta<Stepper> controlled_;
  Stepper plain_;
};

// Finds tau between 0 and span (same sign) with f(z(tau)) = 0, where f is
// negative at 0 and non-negative at span, by Newton on the single-step map
// with a bisection safeguard.
template <typename F, typename DF>
Phase locate(Integrator& integ, const Phase& start, double span, double tol, F f, DF df) {
  double lo = 0.0;
  double hi = span;
  const double f0 = f(start);
  const double f1 = f(integ.single_step(start, span));
  double tau = span * std::clamp(f0 / (f0 - f1), 0.0, 1.0);
  Phase z = integ.single_step(start, tau);
  for (int it = 0; it < 100; ++it) {
    const double v = f(z);
    if (std::abs(v) < 0.1 * tol) return z;
    (v < 0.0 ? lo : hi) = tau;
    const double d = df(z);
    double next = d != 0.0 ? tau - v / d : 0.5 * (lo + hi);
    if (!(std::min(lo, hi) < next && next < std::max(lo, hi))) next = 0.5 * (lo + hi);
    if (std::abs(hi - lo) < 1e-17 * std::max(1.0, std::abs(span))) {
      return integ.single_step(start, 0.5 * (lo + hi));
    }
    tau = next;
    z = integ.single_step(start, tau);
  }
  return z;
}

}  // namespace

void IntegratorConfig::validate() const {
  const double fields[] = {rel_tol, abs_tol, max_step, event_tol,
                           initial_step, max_time, escape_radius, min_radius};
  for (double v : fields) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::DomainError, "integrator settings must be positive and finite");
    }
  }
}

double hamiltonian(const CartesianState& s, const Params& p) {
  const double r = s.radius();
  return 0.5 * s.speed_squared() - p.alpha / (2.0 * r) + p.g / (2.0 * r * r);
}

WallArrival integrate_to_wall(const CartesianState& s, const Params& p,
                              const IntegratorConfig& cfg) {
  p.validate();
  cfg.validate();
  WallArrival out;
  if (std::abs(s.y - p.h) < cfg.event_tol && s.py > 0.0) {
    out.state = s;
    out.state.y = p.h;
    return out;
  }
  if (s.y > p.h + cfg.event_tol) {
    throw Error(ErrorCode::DomainError, "state beyond the wall");
  }
  const double H0 = hamiltonian(s, p);
  if (!(H0 < 0.0)) throw Error(ErrorCode::EscapeDetected, "unbound: H=" + std::to_string(H0));
  const double scale = std::abs(H0);

  Integrator integ(p, H0, cfg);
  Phase z = to_phase(s);
  double ds = cfg.initial_step;
  for (;;) {
    const Phase before = z;
    const double taken = integ.advance(z, ds, cfg.max_step);
    ++out.steps;
    out.max_energy_error = std::max(out.max_energy_error, std::abs(energy_of(z, p) - H0) / scale);
    if (wall_height(z) >= p.h) {
      const double h = p.h;
      Phase hit = locate(
          integ, before, taken, cfg.event_tol, [h](const Phase& q) { return wall_height(q) - h; },
          wall_rate);
      CartesianState at = to_state(hit);
      if (!(std::abs(at.y - p.h) < cfg.event_tol)) {
        throw Error(ErrorCode::StepFailure,
                    "event location failed, y - h = " + std::to_string(at.y - p.h));
      }
      if (!(at.py > kTolGraze)) {
        throw Error(ErrorCode::GrazingContact, "normal speed " + std::to_string(at.py));
      }
      at.y = p.h;
      out.max_energy_error = std::max(out.max_energy_error, std::abs(hamiltonian(at, p) - H0) / scale);
      out.elapsed = at.t - s.t;
      out.state = at;
      return out;
    }
    if (z[4] - s.t > cfg.max_time) {
      throw Error(ErrorCode::NoCollision, "no wall contact within t=" + std::to_string(cfg.max_time));
    }
  }
}

CartesianState propagate(const CartesianState& s, double duration, const Params& p,
                         const IntegratorConfig& cfg) {
  p.validate();
  cfg.validate();
  if (duration == 0.0) return s;
  Integrator integ(p, hamiltonian(s, p), cfg);
  Phase z = to_phase(s);
  const double target = s.t + duration;
  const double dir = duration > 0.0 ? 1.0 : -1.0;
  double ds = dir * cfg.initial_step;
  for (;;) {
    const Phase before = z;
    const double taken = integ.advance(z, ds, dir * cfg.max_step);
    if (dir * (z[4] - target) >= 0.0) {
      // f = dir (t - target) rises along the step; d t / d s = r.
      Phase end = locate(
          integ, before, taken, 1e-14 * std::max(1.0, std::abs(target)),
          [&](const Phase& q) { return dir * (q[4] - target); },
          [&](const Phase& q) { return dir * radius(q); });
      CartesianState out = to_state(end);
      out.t = target;
      return out;
    }
  }
}

PerturbedRun run_perturbed(const CartesianState& s0, int n, const Params& p,
                           const IntegratorConfig& cfg) {
  if (n < 0) throw Error(ErrorCode::DomainError, "negative collision count");
  PerturbedRun out;
  out.energy.H0 = hamiltonian(s0, p);
  const double scale = std::abs(out.energy.H0);
  CartesianState s = s0;
  out.points.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    WallArrival arrival;
    try {
      arrival = integrate_to_wall(s, p, cfg);
    } catch (const Error& err) {
      throw Error(err.code(), "collision " + std::to_string(i) + ": " + err.detail());
    }
    out.energy.max_arc_error = std::max(out.energy.max_arc_error, arrival.max_energy_error);

    SectionPoint pt;
    pt.n = i;
    pt.t = arrival.state.t;
    pt.x = arrival.state.x;
    pt.lambda = std::atan2(arrival.state.py, arrival.state.px);
    pt.state = arrival.state;
    s = billiard::reflect(arrival.state, p);
    try {
      pt.R_value = billiard::conserved_R(kepler::elements_from_cartesian(s, p), p);
    } catch (const Error&) {
      pt.R_value = std::numeric_limits<double>::quiet_NaN();
    }
    out.energy.max_reflection_error =
        std::max(out.energy.max_reflection_error,
                 std::abs(hamiltonian(s, p) - hamiltonian(arrival.state, p)) / scale);
    out.points.push_back(pt);
  }
  out.energy.final_error = std::abs(hamiltonian(s, p) - out.energy.H0) / scale;
  return out;
}

std::vector<SeedResult> section_ensemble(const std::vector<CartesianState>& seeds, int n,
                                         const Params& p, const IntegratorConfig& cfg) {
  std::vector<SeedResult> results(seeds.size());
  if (seeds.empty()) return results;
  const double A = twice_energy(seeds.front(), p);
  for (const CartesianState& s : seeds) {
    if (std::abs(twice_energy(s, p) - A) > 1e-9 * std::max(1.0, std::abs(A))) {
      throw Error(ErrorCode::DomainError, "ensemble seeds must share the energy A");
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        results[i].run = run_perturbed(seeds[i], n, p, cfg);
        results[i].ok = true;
      } catch (const std::exception& e) {
        results[i].ok = false;
        results[i].error = e.what();
      }
    }
  };
  const std::size_t threads =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, seeds.size());
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (std::thread& th : pool) th.join();
  return results;
}

}  // namespace boltzmann::perturbed
