#include "boltzmann/app/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "boltzmann/app/output.hpp"
#include "boltzmann/billiard.hpp"
#include "boltzmann/delaunay.hpp"
#include "boltzmann/kepler.hpp"
#include "boltzmann/perturbed.hpp"

namespace boltzmann::app {

using nlohmann::json;
using kepler::OrbitalElements;

namespace {

struct CheckSpec {
  const char* name;
  const char* description;
  double tolerance;
  Sense sense;
};

const CheckSpec kChecks[] = {
    {"kepler_residual", "max |E - e sin E - M| over e in [0, 0.99] x 100 M values", 1e-13, Sense::Below},
    {"crossing_oracle", "closed-form wall crossing vs dense sampling + bisection, |dE|", 1e-10, Sense::Below},
    {"conservation_R", "max relative drift of R over 10^4 collisions", 1e-9, Sense::Below},
    {"conservation_A", "max relative drift of A over 10^4 collisions", 1e-9, Sense::Below},
    {"identity_R", "max |R(a, e, theta0) - R(R0)| / max(1, |R|) per collision", 1e-10, Sense::AtMost},
    {"R0_routes", "max disagreement of the R0 routes, before/after reflection", 1e-10, Sense::AtMost},
    {"box_violations", "collisions violating r < 2aM, the R0^2 and R bounds", 0.0, Sense::AtMost},
    {"level_set_residual", "max |R(x_n, lambda_n) - R| over collision points", 1e-8, Sense::Below},
    {"ode_single_arc", "max per-arc impact distance, ODE vs closed form", 1e-8, Sense::Below},
    {"ode_positions", "max impact distance over 100 collisions, ODE vs event-driven", 1e-6, Sense::Below},
    {"ode_energy_per_arc", "max relative H error per arc, g = 0", 1e-10, Sense::Below},
    {"sign_mismatches", "collisions where sign(a) breaks (-1)^n", 0.0, Sense::AtMost},
    {"delta2_gamma_spread", "max relative spread of delta2 gamma per parity class", 5e-6, Sense::AtMost},
    {"anisochrony_ratio", "|omega(R(1+1e-3)) - omega(R)| / estimation noise", 10.0, Sense::Above},
    {"perturbed_R_drift", "max relative drift of osculating R, g = 0.05, 10^3 collisions", 1e-4, Sense::Above},
    {"perturbed_energy_per_arc", "max relative H error per arc, g = 0.05", 1e-10, Sense::Below},
};

const Params kUnit{1.0, 0.0, 1.0};

// Reference orbit with A = -1/2: e = 0.6, aphelion at theta0 = 2, starting at the perihelion.
CartesianState reference_state() {
  return kepler::cartesian_from_elements(OrbitalElements::make(-0.5, std::sqrt(0.32), 2.0, 1.0), 0.0);
}

// Rotation-regime orbit (R > h alpha) with A = -1/8: e = 0.5, theta0 = 4, starting at the aphelion.
CartesianState gamma_state() {
  return kepler::cartesian_from_elements(OrbitalElements::make(-0.125, std::sqrt(1.5), 4.0, 1.0), kPi);
}

double kepler_residual() {
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double e = 0.01 * i;
    for (int j = 0; j < 100; ++j) {
      const double M = kTwoPi * j / 100.0;
      const double E = kepler::solve_kepler(M, e);
      worst = std::max(worst, std::abs(E - e * std::sin(E) - M));
    }
  }
  return worst;
}

double crossing_oracle() {
  double worst = 0.0;
  const double es[] = {0.1, 0.45, 0.8, 0.95};
  const double thetas[] = {0.3, 2.0, 3.9, 5.5};
  for (double e : es) {
    for (double th : thetas) {
      for (double sign : {-1.0, 1.0}) {
        const double A = -0.3;
        const double aM = -1.0 / (2.0 * A);
        const auto el = OrbitalElements::make(A, sign * std::sqrt(aM / 2.0 * (1.0 - e * e)), th, 1.0);
        const auto hit = billiard::next_wall_crossing(el, 0.0, 0.0, kUnit);
        if (!hit || kepler::position_at(el, 0.0).y >= kUnit.h) continue;
        auto f = [&](double E) { return kepler::position_at(el, E).y - kUnit.h; };
        const int n = 10000;
        double prev = f(0.0);
        for (int i = 1; i <= n; ++i) {
          const double E = kTwoPi * i / n;
          const double cur = f(E);
          if (prev < 0.0 && cur >= 0.0) {
            double lo = E - kTwoPi / n;
            double hi = E;
            for (int k = 0; k < 100; ++k) {
              const double mid = 0.5 * (lo + hi);
              (f(mid) < 0.0 ? lo : hi) = mid;
            }
            worst = std::max(worst, std::abs(hit->E_hit - 0.5 * (lo + hi)));
            break;
          }
          prev = cur;
        }
      }
    }
  }
  return worst;
}

std::string events_csv(const billiard::RunResult& res) {
  Csv csv({"n", "t", "x_impact", "r", "lambda", "A", "a_pre", "a_post", "theta0_pre", "theta0_post",
           "R_eq16", "R0", "R_eq17", "residual_identity", "bounds_ok"});
  for (std::size_t i = 0; i < res.events.size(); ++i) {
    const auto& ev = res.events[i];
    const auto& rep = res.reports[i];
    csv.row({fmt(ev.n), fmt(ev.t), fmt(ev.x_impact), fmt(ev.r), fmt(ev.lambda), fmt(ev.pre.A),
             fmt(ev.pre.a), fmt(ev.post.a), fmt(ev.pre.theta0), fmt(ev.post.theta0), fmt(rep.R_eq16),
             fmt(rep.R0), fmt(rep.R_eq17), fmt(rep.residual_identity), fmt(rep.bounds_ok)});
  }
  return csv.text();
}

}  // namespace

const std::vector<std::string>& verify_check_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& c : kChecks) v.emplace_back(c.name);
    return v;
  }();
  return names;
}

json VerifyReport::to_json() const {
  json checks_json = json::array();
  for (const auto& c : checks) {
    const char* sense = c.sense == Sense::Below ? "<" : c.sense == Sense::AtMost ? "<=" : ">";
    checks_json.push_back({{"name", c.name},
                           {"description", c.description},
                           {"measured", c.measured},
                           {"requirement", std::string(sense) + " " + fmt(c.tolerance)},
                           {"tolerance", c.tolerance},
                           {"margin", c.margin},
                           {"passed", c.passed}});
  }
  return {{"all_passed", all_passed}, {"checks", checks_json}};
}

VerifyReport run_verify_suite(const std::map<std::string, double>& overrides,
                              std::map<std::string, std::string>* tables) {
  std::map<std::string, double> measured;

  measured["kepler_residual"] = kepler_residual();
  measured["crossing_oracle"] = crossing_oracle();

  // Event-driven reference run.
  const billiard::RunResult ref = billiard::run(reference_state(), 10000, kUnit, {0});
  if (ref.status != billiard::RunStatus::Completed) {
    throw Error(ErrorCode::NoCollision, "reference run stopped: " + ref.diagnostic);
  }
  {
    const double R0 = billiard::conserved_R(ref.events.front().pre, kUnit);
    const double A0 = ref.events.front().pre.A;
    double dR = 0.0, dA = 0.0, ident = 0.0, routes = 0.0, level = 0.0;
    int violations = 0;
    for (std::size_t i = 0; i < ref.events.size(); ++i) {
      const auto& ev = ref.events[i];
      const auto& rep = ref.reports[i];
      dR = std::max(dR, std::abs(billiard::conserved_R(ev.post, kUnit) - R0) / std::abs(R0));
      dA = std::max(dA, std::abs(ev.post.A - A0) / std::abs(A0));
      ident = std::max(ident, rep.residual_identity / std::max(1.0, std::abs(rep.R_eq16)));
      routes = std::max(routes, rep.R0_route_residual);
      violations += rep.bounds_ok ? 0 : 1;
      level = std::max(level, std::abs(billiard::R_at_wall_point(ev.x_impact, ev.lambda, A0, kUnit) - R0));
    }
    measured["conservation_R"] = dR;
    measured["conservation_A"] = dA;
    measured["identity_R"] = ident;
    measured["R0_routes"] = routes;
    measured["box_violations"] = violations;
    measured["level_set_residual"] = level;
  }

  // ODE oracle at g = 0.
  {
    const perturbed::PerturbedRun num = perturbed::run_perturbed(reference_state(), 100, kUnit);
    double pos = 0.0;
    for (std::size_t i = 0; i < num.points.size(); ++i) {
      pos = std::max(pos, std::abs(num.points[i].x - ref.events[i].x_impact));
    }
    double arc = 0.0;
    CartesianState s = reference_state();
    for (int i = 0; i < 100; ++i) {
      const billiard::StepResult exact = billiard::step(s, kUnit, i);
      const perturbed::WallArrival w = perturbed::integrate_to_wall(s, kUnit);
      arc = std::max(arc, std::hypot(w.state.x - exact.event.x_impact, w.state.y - kUnit.h));
      s = exact.state;
    }
    measured["ode_single_arc"] = arc;
    measured["ode_positions"] = pos;
    measured["ode_energy_per_arc"] = num.energy.max_arc_error;
  }

  // Angle gamma on the rotation-regime orbit.
  const billiard::RunResult grun = billiard::run(gamma_state(), 1000, kUnit, {0});
  const delaunay::GammaSeries series = delaunay::gamma_series(grun.events, kUnit);
  {
    const delaunay::ConjectureReport rep = delaunay::conjecture_report(series, kUnit, 400);
    int mismatches = 0;
    for (const auto& s : series.samples) mismatches += s.branch_mismatch ? 1 : 0;
    measured["sign_mismatches"] = mismatches;
    measured["delta2_gamma_spread"] = std::max(rep.spread_even, rep.spread_odd);
    const delaunay::OmegaEstimate w1 = delaunay::omega_at(series.L, series.R, kUnit, 1000);
    const delaunay::OmegaEstimate w2 = delaunay::omega_at(series.L, series.R * (1.0 + 1e-3), kUnit, 1000);
    const double noise = std::max({w1.noise, w2.noise, 1e-16 * std::abs(w1.omega)});
    measured["anisochrony_ratio"] = std::abs(w2.omega - w1.omega) / noise;
  }

  // Perturbation sensitivity.
  {
    const perturbed::PerturbedRun run = perturbed::run_perturbed(reference_state(), 1000, {1.0, 0.05, 1.0});
    const double R0 = run.points.front().R_value;
    double drift = 0.0;
    for (const auto& pt : run.points) drift = std::max(drift, std::abs(pt.R_value - R0) / std::abs(R0));
    measured["perturbed_R_drift"] = drift;
    measured["perturbed_energy_per_arc"] = run.energy.max_arc_error;
  }

  VerifyReport report;
  report.all_passed = true;
  for (const CheckSpec& spec : kChecks) {
    CheckResult c;
    c.name = spec.name;
    c.description = spec.description;
    c.sense = spec.sense;
    c.tolerance = spec.tolerance;
    if (auto it = overrides.find(spec.name); it != overrides.end()) c.tolerance = it->second;
    c.measured = measured.at(spec.name);
    switch (spec.sense) {
      case Sense::Below: c.passed = c.measured < c.tolerance; break;
      case Sense::AtMost: c.passed = c.measured <= c.tolerance; break;
      case Sense::Above: c.passed = c.measured > c.tolerance; break;
    }
    c.margin = spec.sense == Sense::Above ? c.measured - c.tolerance : c.tolerance - c.measured;
    report.all_passed = report.all_passed && c.passed;
    report.checks.push_back(c);
  }

  if (tables) {
    Csv checks({"check", "measured", "tolerance", "margin", "passed"});
    for (const auto& c : report.checks) {
      checks.row({c.name, fmt(c.measured), fmt(c.tolerance), fmt(c.margin), fmt(c.passed)});
    }
    (*tables)["checks.csv"] = checks.text();
    (*tables)["events.csv"] = events_csv(ref);
    Csv gamma({"n", "gamma", "delta2_gamma", "eps_observed", "parity"});
    for (const auto& s : series.samples) {
      gamma.row({fmt(s.n), fmt(s.gamma), fmt(s.delta2_gamma), fmt(s.eps_observed), fmt(s.parity())});
    }
    (*tables)["gamma.csv"] = gamma.text();
  }
  return report;
}

CommandResult cmd_verify(const RunConfig& cfg) {
  validate(cfg);
  std::map<std::string, std::string> tables;
  const VerifyReport report = run_verify_suite(cfg.check_tolerances, &tables);
  OutputBundle out(cfg.output_dir);
  for (const auto& [name, content] : tables) out.write(name, content);
  const json rep = report.to_json();
  out.write("verify_report.json", rep.dump(2) + "\n");
  json m;
  m["mode"] = "verify";
  m["config"] = to_json(cfg);
  m["all_passed"] = report.all_passed;
  out.finish(m);

  int failed = 0;
  std::string names;
  for (const auto& c : report.checks) {
    if (!c.passed) {
      ++failed;
      names += " " + c.name;
    }
  }
  if (failed > 0) return {kExitCheckFailure, std::to_string(failed) + " check(s) failed:" + names};
  return {kExitOk, "all " + std::to_string(report.checks.size()) + " checks passed"};
}

}  // namespace boltzmann::app
