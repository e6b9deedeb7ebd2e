// Acceptance run: one PASS/FAIL line per criterion with the measured value.
// Exit status is the number of failing criteria.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "boltzmann/app/commands.hpp"
#include "boltzmann/app/config.hpp"
#include "boltzmann/billiard.hpp"
#include "boltzmann/delaunay.hpp"
#include "boltzmann/kepler.hpp"
#include "boltzmann/perturbed.hpp"

using namespace boltzmann;
using kepler::OrbitalElements;
namespace fs = std::filesystem;

namespace {

const Params kUnit{1.0, 0.0, 1.0};

int failures = 0;

void report(int id, const std::string& what, bool ok, const std::string& measured) {
  std::printf("[%s] %2d %-58s %s\n", ok ? "PASS" : "FAIL", id, what.c_str(), measured.c_str());
  std::fflush(stdout);
  failures += ok ? 0 : 1;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

CartesianState reference_state() {
  return kepler::cartesian_from_elements(OrbitalElements::make(-0.5, std::sqrt(0.32), 2.0, 1.0), 0.0);
}

CartesianState rotation_state() {
  return kepler::cartesian_from_elements(OrbitalElements::make(-0.125, std::sqrt(1.5), 4.0, 1.0), kPi);
}

double R_of(const OrbitalElements& el) { return el.a * el.a + kUnit.h * kUnit.alpha * el.e * std::sin(el.theta0); }

double aM_of(const OrbitalElements& el) { return -kUnit.alpha / (2.0 * el.A); }

// |Q - C| straight from the definition of the ellipse center.
double R0_center(const OrbitalElements& el) {
  const double c = aM_of(el) * el.e;
  return std::hypot(c * std::cos(el.theta0), c * std::sin(el.theta0) - kUnit.h);
}

// Same distance from the impact geometry: the direction P -> F2 is P -> O mirrored
// about the normal, and |P F2| = 2aM - r. The center is F2 / 2.
double R0_geometry(const billiard::CollisionEvent& ev, const OrbitalElements& el) {
  const double x = ev.x_impact;
  const double r = std::hypot(x, kUnit.h);
  const double aM = aM_of(el);
  const kepler::Vec2 v = kepler::velocity_at(el, kepler::eccentric_anomaly_of(el, {x, kUnit.h}));
  const double vn = std::hypot(v.x, v.y);
  const double tx = v.x / vn;
  const double ty = v.y / vn;
  const double ux = -x / r;
  const double uy = -kUnit.h / r;
  const double d = ux * tx + uy * ty;
  const double mx = ux - 2.0 * d * tx;
  const double my = uy - 2.0 * d * ty;
  const double f2x = x + (2.0 * aM - r) * mx;
  const double f2y = kUnit.h + (2.0 * aM - r) * my;
  return std::hypot(0.5 * f2x, 0.5 * f2y - kUnit.h);
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  std::printf("acceptance criteria\n");

  // Event-driven reference run, 10^4 collisions.
  const billiard::RunResult ref = billiard::run(reference_state(), 10000, kUnit, {0});
  const bool ref_ok = ref.status == billiard::RunStatus::Completed && ref.events.size() == 10000;

  {
    const double R0 = R_of(ref.events.front().pre);
    const double A0 = ref.events.front().pre.A;
    double dR = 0.0, dA = 0.0;
    for (const auto& ev : ref.events) {
      dR = std::max(dR, std::abs(R_of(ev.post) - R0) / std::abs(R0));
      dA = std::max(dA, std::abs(ev.post.A - A0) / std::abs(A0));
    }
    report(1, "R and A conserved over 10^4 collisions (< 1e-9 rel.)", ref_ok && dR < 1e-9 && dA < 1e-9,
           "dR=" + num(dR) + " dA=" + num(dA) + " n=" + std::to_string(ref.events.size()));
  }

  {
    double worst = 0.0;
    for (const auto& ev : ref.events) {
      const double R16 = R_of(ev.pre);
      const double aM = aM_of(ev.pre);
      const double R17 = kUnit.alpha / (2.0 * aM) * (kUnit.h * kUnit.h + aM * aM - std::pow(R0_center(ev.pre), 2));
      // The library's own report must agree with the direct evaluation.
      const billiard::InvariantReport rep = billiard::invariant_report(ev, kUnit);
      worst = std::max({worst, std::abs(R16 - R17) / std::max(1.0, std::abs(R16)),
                        std::abs(rep.R_eq16 - rep.R_eq17) / std::max(1.0, std::abs(rep.R_eq16))});
    }
    report(2, "two expressions of R agree at every collision (<= 1e-10)", ref_ok && worst <= 1e-10,
           "max=" + num(worst));
  }

  {
    double geo = 0.0, pre_post = 0.0;
    for (const auto& ev : ref.events) {
      geo = std::max(geo, std::abs(R0_geometry(ev, ev.pre) - R0_center(ev.pre)));
      geo = std::max(geo, std::abs(billiard::R0_from_geometry(ev.r, aM_of(ev.pre), ev.lambda) - R0_center(ev.pre)));
      pre_post = std::max(pre_post, std::abs(R0_center(ev.pre) - R0_center(ev.post)));
    }
    report(3, "R0 from geometry = R0 from center; pre = post (1e-10)",
           ref_ok && geo <= 1e-10 && pre_post <= 1e-10, "geom=" + num(geo) + " pre/post=" + num(pre_post));
  }

  {
    int violations = 0;
    for (const auto& ev : ref.events) {
      const double aM = aM_of(ev.pre);
      const double r = std::hypot(ev.x_impact, kUnit.h);
      const double R0 = R0_center(ev.pre);
      const double R = R_of(ev.pre);
      const double h = kUnit.h;
      const double lo = kUnit.alpha * h * h / (2.0 * aM);
      const double hi = (1.0 + aM * aM / (h * h) - std::pow(aM / h - r / h, 2)) * lo;
      const bool ok = r < 2.0 * aM && R0 * R0 > std::pow(aM - r, 2) && R0 * R0 < aM * aM && lo < R && R < hi;
      violations += ok ? 0 : 1;
    }
    report(4, "inequality box holds at every collision", ref_ok && violations == 0,
           "violations=" + std::to_string(violations));
  }

  // Rotation-regime orbit.
  const billiard::RunResult rot = billiard::run(rotation_state(), 1000, kUnit, {0});
  const delaunay::GammaSeries series = delaunay::gamma_series(rot.events, kUnit);
  {
    const double s0 = rotation_state().angular_momentum() >= 0.0 ? 1.0 : -1.0;
    int sign_breaks = 0;
    for (std::size_t n = 0; n < rot.events.size(); ++n) {
      const double expect_pre = (n % 2 == 0 ? 1.0 : -1.0) * s0;
      sign_breaks += (rot.events[n].pre.a >= 0.0 ? 1.0 : -1.0) != expect_pre;
      sign_breaks += (rot.events[n].post.a >= 0.0 ? 1.0 : -1.0) != -expect_pre;
    }
    double spread = 0.0;
    for (int parity : {0, 1}) {
      double lo = 1e300, hi = -1e300, sum = 0.0;
      int count = 0;
      for (const auto& s : series.samples) {
        if (s.parity() != parity || !std::isfinite(s.delta2_gamma)) continue;
        lo = std::min(lo, s.delta2_gamma);
        hi = std::max(hi, s.delta2_gamma);
        sum += s.delta2_gamma;
        ++count;
      }
      spread = std::max(spread, count > 0 ? (hi - lo) / std::abs(sum / count) : INFINITY);
    }
    const bool R_ok = series.R > kUnit.h * kUnit.alpha;
    report(5, "sign(a) alternates; delta2 gamma spread per parity <= 1e-6",
           R_ok && rot.events.size() >= 1000 && sign_breaks == 0 && spread <= 1e-6,
           "breaks=" + std::to_string(sign_breaks) + " spread=" + num(spread) + " R=" + num(series.R));
  }

  {
    const delaunay::OmegaEstimate w1 = delaunay::omega_at(series.L, series.R, kUnit, 1000);
    const delaunay::OmegaEstimate w2 = delaunay::omega_at(series.L, series.R * (1.0 + 1e-3), kUnit, 1000);
    const double noise = std::max({w1.noise, w2.noise, 1e-16 * std::abs(w1.omega)});
    const double ratio = std::abs(w2.omega - w1.omega) / noise;
    report(6, "omega(R) and omega(R(1+1e-3)) differ by > 10x noise", ratio > 10.0,
           "domega=" + num(std::abs(w2.omega - w1.omega)) + " noise=" + num(noise) + " ratio=" + num(ratio));
  }

  {
    const perturbed::PerturbedRun num_run = perturbed::run_perturbed(reference_state(), 100, kUnit);
    double pos = 0.0;
    for (std::size_t i = 0; i < 100; ++i) {
      pos = std::max(pos, std::abs(num_run.points.at(i).x - ref.events.at(i).x_impact));
    }
    double arc = 0.0;
    CartesianState s = reference_state();
    for (int i = 0; i < 100; ++i) {
      const billiard::StepResult exact = billiard::step(s, kUnit, i);
      const perturbed::WallArrival w = perturbed::integrate_to_wall(s, kUnit);
      arc = std::max(arc, std::hypot(w.state.x - exact.event.x_impact, w.state.y - kUnit.h));
      s = exact.state;
    }
    report(7, "ODE vs event-driven: 100 impacts 1e-6, per arc 1e-8", pos < 1e-6 && arc < 1e-8,
           "impacts=" + num(pos) + " arc=" + num(arc));
  }

  {
    const Params p{1.0, 0.05, 1.0};
    const perturbed::PerturbedRun run = perturbed::run_perturbed(reference_state(), 1000, p);
    // osculating R recomputed from the impact states with g = 0 elements
    double R0 = NAN, drift = 0.0;
    for (const auto& pt : run.points) {
      const double R = R_of(kepler::elements_from_cartesian(pt.state, kUnit));
      if (std::isnan(R0)) R0 = R;
      drift = std::max(drift, std::abs(R - R0) / std::abs(R0));
    }
    report(8, "g=0.05: osculating R drifts > 1e-4, H per arc < 1e-10",
           run.points.size() == 1000 && drift > 1e-4 && run.energy.max_arc_error < 1e-10,
           "drift=" + num(drift) + " H=" + num(run.energy.max_arc_error));
  }

  {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double e = 0.99 * i / 99.0;
      for (int j = 0; j < 100; ++j) {
        const double M = kTwoPi * j / 100.0;
        const double E = kepler::solve_kepler(M, e);
        worst = std::max(worst, std::abs(E - e * std::sin(E) - M));
      }
    }
    report(9, "Kepler residual on the 100 x 100 (e, M) grid < 1e-13", worst < 1e-13, "max=" + num(worst));
  }

  {
    const fs::path base = fs::temp_directory_path() / "boltzmann_acceptance";
    fs::remove_all(base);
    std::ostringstream log;
    bool ok = true;
    for (const char* run : {"a", "b"}) {
      app::RunConfig cfg = app::default_config(app::Mode::Verify);
      cfg.output_dir = (base / run).string();
      ok = app::execute(cfg, log) == app::kExitOk && ok;
    }
    int compared = 0, differing = 0;
    for (const auto& entry : fs::directory_iterator(base / "a")) {
      if (entry.path().extension() != ".csv") continue;
      ++compared;
      differing += slurp(entry.path()) != slurp(base / "b" / entry.path().filename());
    }
    report(10, "repeated verify runs give byte-identical CSVs", ok && compared > 0 && differing == 0,
           "files=" + std::to_string(compared) + " differing=" + std::to_string(differing) +
               (ok ? "" : " (verify failed: " + log.str() + ")"));
  }

  std::printf("%d of 10 criteria failed\n", failures);
  return failures;
}
