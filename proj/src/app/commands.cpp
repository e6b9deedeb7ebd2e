#include "boltzmann/app/commands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "boltzmann/app/output.hpp"
#include "boltzmann/app/svg.hpp"
#include "boltzmann/app/verify.hpp"
#include "boltzmann/billiard.hpp"
#include "boltzmann/delaunay.hpp"
#include "boltzmann/kepler.hpp"
#include "boltzmann/perturbed.hpp"

namespace boltzmann::app {

using nlohmann::json;
using kepler::OrbitalElements;

namespace {

constexpr int kArcPoints = 512;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const char* status_name(billiard::RunStatus s) {
  switch (s) {
    case billiard::RunStatus::Completed: return "completed";
    case billiard::RunStatus::NoCollision: return "no-collision";
    case billiard::RunStatus::Grazing: return "grazing";
  }
  return "?";
}

Csv events_table() {
  return Csv({"n", "t", "x_impact", "r", "lambda", "A", "a_pre", "a_post", "theta0_pre",
              "theta0_post", "R_eq16", "R0", "R_eq17", "residual_identity", "bounds_ok"});
}

void event_row(Csv& csv, const billiard::CollisionEvent& ev, const billiard::InvariantReport& rep) {
  csv.row({fmt(ev.n), fmt(ev.t), fmt(ev.x_impact), fmt(ev.r), fmt(ev.lambda), fmt(ev.pre.A),
           fmt(ev.pre.a), fmt(ev.post.a), fmt(ev.pre.theta0), fmt(ev.post.theta0), fmt(rep.R_eq16),
           fmt(rep.R0), fmt(rep.R_eq17), fmt(rep.residual_identity), fmt(rep.bounds_ok)});
}

Csv trajectory_table(const std::vector<CartesianState>& samples) {
  Csv csv({"t", "x", "y", "px", "py"});
  for (const CartesianState& s : samples) csv.row({fmt(s.t), fmt(s.x), fmt(s.y), fmt(s.px), fmt(s.py)});
  return csv;
}

Polyline ellipse_points(const OrbitalElements& el, double E0, double E1) {
  Polyline out;
  out.reserve(kArcPoints);
  for (int k = 0; k < kArcPoints; ++k) {
    const kepler::Vec2 q = kepler::position_at(el, E0 + (E1 - E0) * k / (kArcPoints - 1));
    out.emplace_back(q.x, q.y);
  }
  return out;
}

// Covered arc [E_from, E_to] solid, the rest of the ellipse dashed.
void add_arc(TrajectoryFigure& fig, const OrbitalElements& el, kepler::Vec2 from, kepler::Vec2 to) {
  const double E0 = kepler::eccentric_anomaly_of(el, from);
  double E1 = kepler::eccentric_anomaly_of(el, to);
  while (E1 < E0) E1 += kTwoPi;
  fig.used.push_back(ellipse_points(el, E0, E1));
  fig.unused.push_back(ellipse_points(el, E1, E0 + kTwoPi));
}

json base_manifest(const RunConfig& cfg) {
  json m;
  m["mode"] = to_string(cfg.mode);
  m["config"] = to_json(cfg);
  return m;
}

// Event record for a perturbed impact, using osculating (g = 0) elements.
bool osculating_event(const CartesianState& incoming, const Params& p, int n,
                      billiard::CollisionEvent& ev, billiard::InvariantReport& rep) {
  Params p0 = p;
  p0.g = 0.0;
  try {
    ev.n = n;
    ev.t = incoming.t;
    ev.x_impact = incoming.x;
    ev.r = std::hypot(incoming.x, p.h);
    ev.lambda = std::atan2(incoming.py, incoming.px);
    ev.pre = kepler::elements_from_cartesian(incoming, p0);
    ev.post = kepler::elements_from_cartesian(billiard::reflect(incoming, p0), p0);
    rep = billiard::invariant_report(ev, p0);
    return true;
  } catch (const Error&) {
    return false;
  }
}

CommandResult simulate_exact(const RunConfig& cfg) {
  const Params& p = cfg.params;
  const CartesianState s0 = cfg.initial->resolve(p);
  billiard::RunOptions opts;
  opts.samples_per_arc = cfg.samples_per_arc;
  const billiard::RunResult res = billiard::run(s0, cfg.n_collisions, p, opts);

  OutputBundle out(cfg.output_dir);
  Csv events = events_table();
  double max_residual = 0.0;
  int bounds_violations = 0;
  for (std::size_t i = 0; i < res.events.size(); ++i) {
    event_row(events, res.events[i], res.reports[i]);
    max_residual = std::max(max_residual, res.reports[i].residual_identity);
    bounds_violations += res.reports[i].bounds_ok ? 0 : 1;
  }
  out.write("events.csv", events.text());
  out.write("trajectory.csv", trajectory_table(res.samples).text());

  TrajectoryFigure fig;
  fig.h = p.h;
  kepler::Vec2 from{s0.x, s0.y};
  const std::size_t arcs = std::min<std::size_t>(res.events.size(), cfg.figure_arcs);
  for (std::size_t i = 0; i < arcs; ++i) {
    const auto& ev = res.events[i];
    add_arc(fig, ev.pre, from, {ev.x_impact, p.h});
    from = {ev.x_impact, p.h};
  }
  if (res.events.empty()) {
    Polyline path;
    for (const auto& s : res.samples) path.emplace_back(s.x, s.y);
    fig.paths.push_back(path);
    try {
      const OrbitalElements el = kepler::elements_from_cartesian(s0, p);
      fig.unused.push_back(ellipse_points(el, 0.0, kTwoPi));
    } catch (const Error&) {
    }
  }
  out.write("trajectory.svg", trajectory_svg(fig));

  json m = base_manifest(cfg);
  m["status"] = status_name(res.status);
  if (!res.diagnostic.empty()) m["diagnostic"] = res.diagnostic;
  m["collisions"] = res.events.size();
  m["max_residual_identity"] = max_residual;
  m["bounds_violations"] = bounds_violations;
  if (!res.events.empty()) {
    double drift = 0.0;
    const double R0 = res.reports.front().R_eq16;
    for (const auto& r : res.reports) drift = std::max(drift, std::abs(r.R_eq16 - R0) / std::abs(R0));
    m["max_relative_R_drift"] = drift;
  }
  out.finish(m);
  if (res.status == billiard::RunStatus::Grazing) {
    return {kExitRuntimeError, "halted: " + res.diagnostic};
  }
  return {kExitOk, std::to_string(res.events.size()) + " collisions"};
}

CommandResult simulate_perturbed(const RunConfig& cfg) {
  const Params& p = cfg.params;
  const CartesianState s0 = cfg.initial->resolve(p);
  const perturbed::PerturbedRun run = perturbed::run_perturbed(s0, cfg.n_collisions, p, cfg.integrator);

  OutputBundle out(cfg.output_dir);
  Csv events = events_table();
  std::vector<CartesianState> samples{s0};
  TrajectoryFigure fig;
  fig.h = p.h;
  Polyline path{{s0.x, s0.y}};
  CartesianState start = s0;
  int skipped = 0;
  for (std::size_t i = 0; i < run.points.size(); ++i) {
    const perturbed::SectionPoint& pt = run.points[i];
    billiard::CollisionEvent ev;
    billiard::InvariantReport rep;
    if (osculating_event(pt.state, p, static_cast<int>(i), ev, rep)) {
      event_row(events, ev, rep);
    } else {
      ++skipped;
    }
    if (cfg.samples_per_arc > 0) {
      const double elapsed = pt.state.t - start.t;
      for (int k = 1; k < cfg.samples_per_arc; ++k) {
        samples.push_back(perturbed::propagate(start, elapsed * k / cfg.samples_per_arc, p, cfg.integrator));
      }
      samples.push_back(pt.state);
      samples.push_back(billiard::reflect(pt.state, p));
    }
    start = billiard::reflect(pt.state, p);
  }
  out.write("events.csv", events.text());
  out.write("trajectory.csv", trajectory_table(samples).text());

  // Figure: the first figure_arcs arcs of the sampled path.
  int arcs = 0;
  for (std::size_t i = 1; i < samples.size() && arcs < cfg.figure_arcs; ++i) {
    path.emplace_back(samples[i].x, samples[i].y);
    if (std::abs(samples[i].y - p.h) < 1e-9 && samples[i].py < 0.0) ++arcs;
  }
  fig.paths.push_back(path);
  out.write("trajectory.svg", trajectory_svg(fig));

  json m = base_manifest(cfg);
  m["status"] = "completed";
  m["collisions"] = run.points.size();
  m["energy"] = {{"H0", run.energy.H0},
                 {"max_arc_error", run.energy.max_arc_error},
                 {"max_reflection_error", run.energy.max_reflection_error},
                 {"final_error", run.energy.final_error}};
  if (skipped > 0) m["events_without_osculating_ellipse"] = skipped;
  out.finish(m);
  return {kExitOk, std::to_string(run.points.size()) + " collisions"};
}

// Uniform in [0, 1) from the top 53 bits; independent of the standard
// library's distribution implementations.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double section_scatter(const std::vector<perturbed::SeedResult>& results) {
  double sum = 0.0;
  int count = 0;
  for (const auto& r : results) {
    if (!r.ok || r.run.points.empty()) continue;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& pt : r.run.points) {
      if (!std::isfinite(pt.R_value)) continue;
      lo = std::min(lo, pt.R_value);
      hi = std::max(hi, pt.R_value);
    }
    if (hi >= lo) {
      sum += hi - lo;
      ++count;
    }
  }
  return count > 0 ? sum / count : kNaN;
}

Csv section_table(const std::vector<perturbed::SeedResult>& results) {
  Csv csv({"seed_id", "n", "x", "lambda", "R_value"});
  for (std::size_t k = 0; k < results.size(); ++k) {
    if (!results[k].ok) continue;
    for (const auto& pt : results[k].run.points) {
      csv.row({fmt(static_cast<long long>(k)), fmt(pt.n), fmt(pt.x), fmt(pt.lambda), fmt(pt.R_value)});
    }
  }
  return csv;
}

json seed_failures(const std::vector<perturbed::SeedResult>& results) {
  json fails = json::array();
  for (std::size_t k = 0; k < results.size(); ++k) {
    if (!results[k].ok) fails.push_back({{"seed_id", k}, {"error", results[k].error}});
  }
  return fails;
}

}  // namespace

std::vector<CartesianState> ensemble_seeds(const EnsembleSpec& spec, const Params& p) {
  std::vector<CartesianState> seeds;
  if (spec.count <= 0) return seeds;
  std::mt19937_64 rng(spec.seed);
  const double A = spec.energy;
  const double rho = p.alpha / std::abs(A);  // outer radius of the g = 0 energy surface
  Params p0 = p;
  p0.g = 0.0;
  long attempts = 0;
  while (static_cast<int>(seeds.size()) < spec.count) {
    if (++attempts > 1000000L * spec.count) {
      throw Error(ErrorCode::EmptyRegion, "could not draw ensemble seeds at A=" + std::to_string(A));
    }
    const double x = rho * (2.0 * uniform01(rng) - 1.0);
    const double y = -rho + (p.h + rho) * uniform01(rng);
    const double dir = kTwoPi * uniform01(rng);
    const double r = std::hypot(x, y);
    if (r < 0.05 * rho || y >= p.h) continue;
    const double p2 = A + p.alpha / r - p.g / (r * r);
    if (!(p2 > 1e-3 * std::abs(A))) continue;
    const double speed = std::sqrt(p2);
    const CartesianState s{x, y, speed * std::cos(dir), speed * std::sin(dir), 0.0};
    try {
      const OrbitalElements el = kepler::elements_from_cartesian(s, p0);
      if (el.circular) continue;
      const double E = kepler::eccentric_anomaly_of(el, {x, y});
      if (!billiard::next_wall_crossing(el, E, 0.0, p0)) continue;
    } catch (const Error&) {
      continue;
    }
    seeds.push_back(s);
  }
  return seeds;
}

CommandResult cmd_simulate(const RunConfig& cfg) {
  validate(cfg);
  if (cfg.mode == Mode::ExactG0) return simulate_exact(cfg);
  if (cfg.mode == Mode::Perturbed) return simulate_perturbed(cfg);
  throw ConfigError("mode", "simulate expects exact-g0 or perturbed");
}

CommandResult cmd_gamma(const RunConfig& cfg) {
  validate(cfg);
  if (cfg.mode != Mode::Gamma) throw ConfigError("mode", "gamma subcommand expects mode gamma");
  const Params& p = cfg.params;
  const CartesianState s0 = cfg.initial->resolve(p);
  {
    const OrbitalElements el = kepler::elements_from_cartesian(s0, p);
    const double R = billiard::conserved_R(el, p);
    if (!(R > p.h * p.alpha)) {
      throw ConfigError("initial", "gamma mode needs R > h alpha (R=" + fmt(R) + ")");
    }
  }
  billiard::RunOptions opts;
  opts.samples_per_arc = 0;
  const billiard::RunResult res = billiard::run(s0, cfg.n_collisions, p, opts);
  const delaunay::GammaSeries series = delaunay::gamma_series(res.events, p);

  OutputBundle out(cfg.output_dir);
  Csv csv({"n", "gamma", "delta2_gamma", "eps_observed", "parity"});
  std::vector<Point2> even;
  std::vector<Point2> odd;
  json mismatches = json::array();
  for (const auto& s : series.samples) {
    csv.row({fmt(s.n), fmt(s.gamma), fmt(s.delta2_gamma), fmt(s.eps_observed), fmt(s.parity())});
    if (std::isfinite(s.delta2_gamma)) {
      (s.parity() == 0 ? even : odd).emplace_back(s.n, s.delta2_gamma);
    }
    if (s.branch_mismatch) mismatches.push_back(s.n);
  }
  out.write("gamma.csv", csv.text());
  if (series.samples.size() >= 3) out.write("delta2_gamma.svg", delta2_gamma_svg(even, odd));

  json report;
  report["R"] = series.R;
  report["L"] = series.L;
  report["period"] = series.period;
  report["branch_mismatch_rows"] = mismatches;
  try {
    const delaunay::ConjectureReport rep = delaunay::conjecture_report(series, p, cfg.rerun_collisions);
    report["sign_alternation_ok"] = rep.sign_alternation_ok;
    report["spread_even"] = rep.spread_even;
    report["spread_odd"] = rep.spread_odd;
    report["omega_estimate"] = rep.omega_estimate;
    report["omega_noise"] = rep.omega_noise;
    report["domega_dR"] = rep.domega_dR;
    report["samples"] = rep.samples;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InsufficientData) throw;
    report["error"] = e.what();
  }
  out.write("conjecture_report.json", report.dump(2) + "\n");

  json m = base_manifest(cfg);
  m["status"] = status_name(res.status);
  if (!res.diagnostic.empty()) m["diagnostic"] = res.diagnostic;
  m["collisions"] = res.events.size();
  m["report"] = report;
  out.finish(m);
  if (res.status != billiard::RunStatus::Completed) return {kExitRuntimeError, res.diagnostic};
  return {kExitOk, std::to_string(series.samples.size()) + " gamma samples"};
}

CommandResult cmd_section(const RunConfig& cfg) {
  validate(cfg);
  if (cfg.mode != Mode::Section) throw ConfigError("mode", "section subcommand expects mode section");
  const EnsembleSpec& ens = *cfg.ensemble;
  const double A = ens.energy;
  OutputBundle out(cfg.output_dir);

  const std::vector<CartesianState> seeds = ensemble_seeds(ens, cfg.params);
  const auto results = perturbed::section_ensemble(seeds, cfg.n_collisions, cfg.params, cfg.integrator);
  out.write("section.csv", section_table(results).text());

  SectionFigure fig;
  Params p0 = cfg.params;
  p0.g = 0.0;
  fig.x_max = billiard::accessible_interval(A, cfg.params).x_max;
  for (std::size_t k = 0; k < results.size(); ++k) {
    if (!results[k].ok) continue;
    std::vector<Point2> cloud;
    for (const auto& pt : results[k].run.points) cloud.emplace_back(pt.x, pt.lambda);
    fig.clouds.push_back(cloud);
    try {
      const double R = billiard::conserved_R(kepler::elements_from_cartesian(seeds[k], p0), p0);
      const billiard::ConstantRCurve curve = billiard::level_set_R(A, R, p0, 400);
      Polyline branch[2];
      for (const auto& q : curve.points) branch[q.branch].emplace_back(q.x, q.lambda);
      fig.level_curves.push_back(branch[0]);
      fig.level_curves.push_back(branch[1]);
    } catch (const Error&) {
    }
  }
  out.write("section.svg", section_svg(fig));

  json m = base_manifest(cfg);
  m["seeds"] = seeds.size();
  m["failed_seeds"] = seed_failures(results);
  m["scatter"] = section_scatter(results);
  if (!cfg.g_sweep.empty()) {
    json sweep = json::array();
    bool increasing = true;
    double previous = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cfg.g_sweep.size(); ++i) {
      Params pg = cfg.params;
      pg.g = cfg.g_sweep[i];
      const auto sweep_seeds = ensemble_seeds(ens, pg);
      const auto r = perturbed::section_ensemble(sweep_seeds, cfg.n_collisions, pg, cfg.integrator);
      const std::string name = "section_sweep_" + std::to_string(i) + ".csv";
      out.write(name, section_table(r).text());
      const double scatter = section_scatter(r);
      increasing = increasing && scatter > previous;
      previous = scatter;
      sweep.push_back({{"g", pg.g}, {"file", name}, {"scatter", scatter},
                       {"failed_seeds", seed_failures(r)}});
    }
    m["sweep"] = sweep;
    m["scatter_increasing"] = increasing;
  }
  out.finish(m);
  return {kExitOk, std::to_string(seeds.size()) + " seeds"};
}

CommandResult cmd_region(const RunConfig& cfg) {
  validate(cfg);
  if (cfg.mode != Mode::Region) throw ConfigError("mode", "region subcommand expects mode region");
  const Params& p = cfg.params;
  const double A = cfg.A ? *cfg.A : twice_energy(cfg.initial->resolve(p), p);
  const billiard::AccessibleInterval iv = billiard::accessible_interval(A, p);

  auto boundary = [&](double x) {
    const double r2 = x * x + p.h * p.h;
    return std::sqrt(std::max(0.0, A - p.g / r2 + p.alpha / std::sqrt(r2)));
  };
  // One or two closed intervals, depending on the inner barrier.
  std::vector<std::pair<double, double>> pieces;
  if (iv.x_inner > 0.0) {
    pieces = {{iv.x_min, -iv.x_inner}, {iv.x_inner, iv.x_max}};
  } else {
    pieces = {{iv.x_min, iv.x_max}};
  }
  const int per_piece = std::max(2, cfg.region_samples / static_cast<int>(pieces.size()));
  Csv csv({"x", "upper", "lower"});
  std::vector<Polyline> curves;
  for (const auto& [a, b] : pieces) {
    Polyline up;
    Polyline down;
    for (int k = 0; k < per_piece; ++k) {
      const double x = a + (b - a) * k / (per_piece - 1);
      const bool end = k == 0 || k == per_piece - 1;
      const double v = end ? 0.0 : boundary(x);
      csv.row({fmt(x), fmt(v), fmt(-v)});
      up.emplace_back(x, v);
      down.emplace_back(x, -v);
    }
    curves.push_back(up);
    curves.push_back(down);
  }
  OutputBundle out(cfg.output_dir);
  out.write("region.csv", csv.text());
  out.write("region.svg", region_svg(curves));
  json m = base_manifest(cfg);
  m["A"] = A;
  m["x_min"] = iv.x_min;
  m["x_max"] = iv.x_max;
  m["x_inner"] = iv.x_inner;
  out.finish(m);
  return {kExitOk, "x in (" + fmt(iv.x_min) + ", " + fmt(iv.x_max) + ")"};
}

int execute(const RunConfig& cfg, std::ostream& log) {
  try {
    CommandResult res;
    switch (cfg.mode) {
      case Mode::ExactG0:
      case Mode::Perturbed: res = cmd_simulate(cfg); break;
      case Mode::Gamma: res = cmd_gamma(cfg); break;
      case Mode::Section: res = cmd_section(cfg); break;
      case Mode::Region: res = cmd_region(cfg); break;
      case Mode::Verify: res = cmd_verify(cfg); break;
    }
    log << to_string(cfg.mode) << ": " << res.message << " -> " << cfg.output_dir << "\n";
    return res.exit_code;
  } catch (const ConfigError& e) {
    log << "configuration error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
}

}  // namespace boltzmann::app
