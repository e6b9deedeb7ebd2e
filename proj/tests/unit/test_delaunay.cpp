#include <cmath>
#include <random>

#include "boltzmann/delaunay.hpp"
#include "doctest.h"

using namespace boltzmann;
using namespace boltzmann::delaunay;
using kepler::OrbitalElements;

namespace {

const Params kUnit{1.0, 0.0, 1.0};

// Residual of the unsquared level-curve equation a^2 = R - h alpha sin(psi) sqrt(1 - a^2/L^2).
double implicit_residual(double a, double psi, double R, double L, const Params& p) {
  return a * a + p.h * p.alpha * std::sin(psi) * std::sqrt(1.0 - a * a / (L * L)) - R;
}

// Rotation-regime orbit: A = -1/8 (aM = 4, L^2 = 2), e = 1/2, theta0 = 4, R ~ 1.12.
OrbitalElements gamma_elements() { return OrbitalElements::make(-0.125, std::sqrt(1.5), 4.0, 1.0); }

// Flow time of R(a, psi) once around a rotation curve, computed without the
// closed-form roots: |a| is tracked by Newton continuation on the implicit
// equation and 1/(dR/da) integrated with composite Simpson.
double period_by_continuation(double R, double L, const Params& p) {
  const int n = 20000;
  const double L2 = L * L;
  double a = std::sqrt(R);
  auto solve = [&](double psi, double guess) {
    double x = guess;
    for (int k = 0; k < 50; ++k) {
      const double f = implicit_residual(x, psi, R, L, p);
      const double s = std::sqrt(1.0 - x * x / L2);
      const double df = 2.0 * x - p.h * p.alpha * std::sin(psi) * x / (L2 * s);
      x -= f / df;
    }
    return x;
  };
  auto inv_rate = [&](double psi, double x) {
    const double s = std::sqrt(1.0 - x * x / L2);
    return 1.0 / (2.0 * x - p.h * p.alpha * std::sin(psi) * x / (L2 * s));
  };
  double sum = 0.0;
  const double step = kTwoPi / n;
  for (int i = 0; i <= n; ++i) {
    const double psi = i * step;
    a = solve(psi, a);
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * inv_rate(psi, a);
  }
  return sum * step / 3.0;
}

billiard::RunResult gamma_run(int n) {
  const CartesianState s0 = kepler::cartesian_from_elements(gamma_elements(), kPi);
  return billiard::run(s0, n, kUnit, billiard::RunOptions{0});
}

}  // namespace

TEST_CASE("BranchSpec validation") {
  CHECK_NOTHROW((BranchSpec{1, -1}.validate()));
  CHECK_THROWS_AS((BranchSpec{0, 1}.validate()), Error);
  CHECK_THROWS_AS((BranchSpec{1, 2}.validate()), Error);
}

TEST_CASE("a_branch where the sine vanishes") {
  const double L = -std::sqrt(2.0);
  for (double psi : {0.0, kPi}) {
    for (int eps : {-1, 1}) {
      CHECK(a_branch(psi, 0.9, L, {eps, 1}, kUnit) == doctest::Approx(std::sqrt(0.9)).epsilon(1e-14));
      CHECK(a_branch(psi, 0.9, L, {eps, -1}, kUnit) == doctest::Approx(-std::sqrt(0.9)).epsilon(1e-14));
    }
  }
  CHECK_THROWS_AS(a_branch(1.0, 0.9, 0.5, {1, 1}, kUnit), Error);  // L must be negative
}

TEST_CASE("available branches satisfy the implicit equation") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int available = 0;
  int unavailable = 0;
  for (int i = 0; i < 4000; ++i) {
    const double L = -(0.5 + 2.0 * U(rng));
    const double R = 3.0 * U(rng);
    const double psi = kTwoPi * U(rng);
    const BranchSpec spec{U(rng) < 0.5 ? -1 : 1, U(rng) < 0.5 ? -1 : 1};
    try {
      const double a = a_branch(psi, R, L, spec, kUnit);
      CHECK(std::abs(implicit_residual(a, psi, R, L, kUnit)) < 1e-12 * std::max(1.0, R));
      CHECK(a * spec.eta >= 0.0);
      ++available;
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::BranchUnavailable);
      ++unavailable;
    }
  }
  CHECK(available > 500);
  CHECK(unavailable > 100);
}

TEST_CASE("a_branch recovers the angular momentum of real orbits") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double A = -(0.1 + U(rng));
    const double aM = -1.0 / (2.0 * A);
    const double e = 0.05 + 0.9 * U(rng);
    const double a = (U(rng) < 0.5 ? -1 : 1) * std::sqrt(aM / 2.0 * (1.0 - e * e));
    const auto el = OrbitalElements::make(A, a, kTwoPi * U(rng), 1.0);
    const double R = billiard::conserved_R(el, kUnit);
    const double L = el.delaunay_L();
    double best = 1e9;
    for (int eps : {-1, 1}) {
      try {
        best = std::min(best, std::abs(a_branch(el.theta0, R, L, {eps, 1}, kUnit) - std::abs(a)));
      } catch (const Error&) {
      }
    }
    CHECK(best < 1e-10);
  }
}

TEST_CASE("partial derivatives against finite differences") {
  const double L = -std::sqrt(2.0);
  const double R = 1.12;
  SUBCASE("theta0 = 0") {
    CHECK(dadR_branch(0.0, R, L, {1, 1}, kUnit) == doctest::Approx(0.5 / std::sqrt(R)).epsilon(1e-14));
    CHECK(dadR_branch(0.0, R, L, {1, -1}, kUnit) == doctest::Approx(-0.5 / std::sqrt(R)).epsilon(1e-14));
    CHECK(dadL_branch(0.0, R, L, {1, 1}, kUnit) == 0.0);
  }
  SUBCASE("generic points") {
    int tested = 0;
    for (double psi = 0.05; psi < kTwoPi; psi += 0.1) {
      for (int eps : {-1, 1}) {
        const BranchSpec spec{eps, 1};
        double a = 0.0;
        try {
          a = a_branch(psi, R, L, spec, kUnit);
        } catch (const Error&) {
          continue;
        }
        if (a < 0.05) continue;
        const double dR = 1e-6 * std::max(1.0, R);
        const double dL = 1e-6;
        double fdR = 0.0;
        double fdL = 0.0;
        try {
          fdR = (a_branch(psi, R + dR, L, spec, kUnit) - a_branch(psi, R - dR, L, spec, kUnit)) / (2 * dR);
          fdL = (a_branch(psi, R, L + dL, spec, kUnit) - a_branch(psi, R, L - dL, spec, kUnit)) / (2 * dL);
        } catch (const Error&) {
          continue;
        }
        const double dadR = dadR_branch(psi, R, L, spec, kUnit);
        const double dadL = dadL_branch(psi, R, L, spec, kUnit);
        CHECK(std::abs(dadR - fdR) <= 1e-6 * std::max(1.0, std::abs(dadR)));
        CHECK(std::abs(dadL - fdL) <= 1e-6 * std::max(1.0, std::abs(dadL)));
        ++tested;
      }
    }
    CHECK(tested > 60);
  }
}

TEST_CASE("derivatives are singular at branch points") {
  // Libration curve: the two roots meet at the turning points.
  const double L = -std::sqrt(2.0);
  const double R = 2.1;  // above both h alpha and L^2
  const LevelCurve c = classify_level(R, L, kUnit);
  REQUIRE(c.kind == LevelKind::Libration);
  try {
    dadR_branch(c.psi_lo, R, L, {1, 1}, kUnit);
    FAIL("expected SingularDerivative");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularDerivative);
  }
  // a = 0 on the crossing family.
  try {
    dadR_branch(kPi / 6, 0.5, -std::sqrt(2.0), {-1, 1}, kUnit);
    FAIL("expected SingularDerivative");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularDerivative);
  }
}

TEST_CASE("classify_level") {
  const double L = -std::sqrt(2.0);
  CHECK(classify_level(0.8, L, kUnit).kind == LevelKind::Crossing);
  CHECK(classify_level(1.0, L, kUnit).kind == LevelKind::Crossing);
  CHECK(classify_level(1.5, L, kUnit).kind == LevelKind::Rotation);
  const LevelCurve lib = classify_level(2.1, L, kUnit);
  CHECK(lib.kind == LevelKind::Libration);
  CHECK(lib.psi_lo > 0.0);
  CHECK(lib.psi_hi == doctest::Approx(kPi - lib.psi_lo));
  CHECK_THROWS_AS(classify_level(2.2, L, kUnit), Error);  // above the top of the family
  CHECK_THROWS_AS(branch_path_to(1.0, 1.0, classify_level(0.8, L, kUnit), kUnit), Error);
}

TEST_CASE("gamma and M' on the empty path") {
  CHECK(gamma_of(0.0, 1.2, -std::sqrt(2.0), {}, kUnit) == 0.0);
  CHECK(Mprime_of(0.0, 0.7, 1.2, -std::sqrt(2.0), {}, kUnit) == 0.7);
  CHECK_THROWS_AS(gamma_of(0.5, 1.2, -std::sqrt(2.0), {}, kUnit), Error);
  CHECK_THROWS_AS(gamma_of(0.5, 1.2, -std::sqrt(2.0), {{0.0, 0.4, {-1, 1}}}, kUnit), Error);
  CHECK_THROWS_AS(
      gamma_of(0.5, 1.2, -std::sqrt(2.0), {{0.0, 0.2, {-1, 1}}, {0.3, 0.5, {-1, 1}}}, kUnit), Error);
}

TEST_CASE("gamma is additive over the path") {
  const double L = -std::sqrt(2.0);
  const double R = 1.12;
  const double full = gamma_of(2.5, R, L, {{0.0, 2.5, {-1, 1}}}, kUnit);
  const double split = gamma_of(2.5, R, L, {{0.0, 1.1, {-1, 1}}, {1.1, 2.5, {-1, 1}}}, kUnit);
  const double head = gamma_of(1.1, R, L, {{0.0, 1.1, {-1, 1}}}, kUnit);
  const double tail = gamma_of(2.5, R, L, {{1.1, 2.5, {-1, 1}}}, kUnit);
  const double loop = gamma_of(2.5, R, L, {{2.5, 1.1, {-1, 1}}, {1.1, 2.5, {-1, 1}}}, kUnit);
  CHECK(std::abs(loop) < 1e-11);
  CHECK(std::abs(full - split) < 1e-11);
  CHECK(std::abs(full - head - tail) < 1e-11);
}

TEST_CASE("gamma and M' are derivatives of the generating integral") {
  const double L = -std::sqrt(2.0);
  const double R = 1.12;
  const BranchPath paths[] = {
      {{0.0, 2.5, {-1, 1}}},
      {{0.0, kPi, {-1, 1}}, {kPi, 4.0, {1, 1}}},
  };
  for (const BranchPath& path : paths) {
    const double th = path.back().to;
    const double dR = 1e-5;
    const double fdR = (generating_integral(R + dR, L, path, kUnit) -
                        generating_integral(R - dR, L, path, kUnit)) / (2.0 * dR);
    const double g = gamma_of(th, R, L, path, kUnit);
    CHECK(std::abs(g - fdR) < 1e-6 * std::max(1.0, std::abs(g)));
    const double dL = 1e-5;
    const double fdL = (generating_integral(R, L + dL, path, kUnit) -
                        generating_integral(R, L - dL, path, kUnit)) / (2.0 * dL);
    const double mp = Mprime_of(th, 0.3, R, L, path, kUnit) - 0.3;
    CHECK(std::abs(mp - fdL) < 1e-6 * std::max(1.0, std::abs(mp)));
  }
}

TEST_CASE("period of a rotation curve matches Newton continuation") {
  const double L = -std::sqrt(2.0);
  for (double R : {1.05, 1.12, 1.6, 1.95}) {
    const LevelCurve c = classify_level(R, L, kUnit);
    REQUIRE(c.kind == LevelKind::Rotation);
    CHECK(std::abs(gamma_period(c, kUnit) - period_by_continuation(R, L, kUnit)) < 1e-8);
  }
}

TEST_CASE("branch paths end on the orbit") {
  const auto el = gamma_elements();
  const double R = billiard::conserved_R(el, kUnit);
  const LevelCurve c = classify_level(R, el.delaunay_L(), kUnit);
  REQUIRE(c.kind == LevelKind::Rotation);
  const BranchPath path = branch_path_to(el.theta0, std::abs(el.a), c, kUnit);
  CHECK(path.front().from == 0.0);
  CHECK(path.back().to == doctest::Approx(el.theta0));
  const double a_end = a_branch(el.theta0, R, c.L, path.back().spec, kUnit);
  CHECK(std::abs(a_end - std::abs(el.a)) < 1e-10);
}

TEST_CASE("gamma increments on the rotation reference orbit") {
  const auto res = gamma_run(1000);
  REQUIRE(res.status == billiard::RunStatus::Completed);
  const GammaSeries series = gamma_series(res.events, kUnit);
  CHECK(series.kind == LevelKind::Rotation);
  REQUIRE(series.samples.size() == 1000);
  for (const auto& s : series.samples) CHECK_FALSE(s.branch_mismatch);
  for (std::size_t i = 0; i + 1 < series.samples.size(); ++i) {
    CHECK(series.samples[i].eps_observed == -series.samples[i + 1].eps_observed);
  }
  CHECK(std::isnan(series.samples[998].delta2_gamma));
  CHECK(std::isnan(series.samples[999].delta2_gamma));

  double lo[2] = {1e9, 1e9};
  double hi[2] = {-1e9, -1e9};
  for (std::size_t i = 0; i + 2 < series.samples.size(); ++i) {
    const double d = series.samples[i].delta2_gamma;
    lo[i % 2] = std::min(lo[i % 2], d);
    hi[i % 2] = std::max(hi[i % 2], d);
  }
  for (int k = 0; k < 2; ++k) CHECK((hi[k] - lo[k]) / std::abs(hi[k]) < 1e-6);
  // The two parity classes advance by complementary amounts.
  CHECK(std::abs(hi[0] + hi[1] - series.period) < 1e-8);

  const OmegaEstimate est = estimate_omega(series);
  CHECK(est.count > 400);
  CHECK(est.noise < 1e-6 * est.omega);
}

TEST_CASE("a crossing-curve orbit gives diagnostics only") {
  // Reference A = -1/2 orbit has R < h alpha.
  const auto el = OrbitalElements::make(-0.5, std::sqrt(0.32), 2.0, 1.0);
  const auto res = billiard::run(kepler::cartesian_from_elements(el, 0.0), 20, kUnit, {0});
  const GammaSeries series = gamma_series(res.events, kUnit);
  CHECK(series.kind == LevelKind::Crossing);
  CHECK(series.samples.size() == 20);
  for (const auto& s : series.samples) CHECK(std::isnan(s.gamma));
  CHECK_THROWS_AS(estimate_omega(series), Error);
}

TEST_CASE("conjecture report") {
  SUBCASE("short input") {
    const GammaSeries series = gamma_series(gamma_run(50).events, kUnit);
    try {
      conjecture_report(series, kUnit);
      FAIL("expected InsufficientData");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InsufficientData);
    }
  }
  SUBCASE("reference orbit") {
    const GammaSeries series = gamma_series(gamma_run(200).events, kUnit);
    const ConjectureReport rep = conjecture_report(series, kUnit, 200);
    CHECK(rep.sign_alternation_ok);
    CHECK(rep.spread_even >= 0.0);
    CHECK(rep.spread_even < 1e-6);
    CHECK(rep.spread_odd < 1e-6);
    CHECK(rep.samples == 200);
    CHECK(std::isfinite(rep.domega_dR));
    CHECK(rep.domega_dR != 0.0);
  }
  SUBCASE("distinct R at the same L give distinct omega") {
    const double L = -std::sqrt(2.0);
    const OmegaEstimate w1 = omega_at(L, 1.2, kUnit, 200);
    const OmegaEstimate w2 = omega_at(L, 1.5, kUnit, 200);
    CHECK(std::abs(w1.omega - w2.omega) > 10.0 * (w1.noise + w2.noise));
  }
}
