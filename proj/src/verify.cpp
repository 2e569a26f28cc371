#include "lanefree/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "lanefree/controller.hpp"
#include "lanefree/dynamics.hpp"
#include "lanefree/geometry.hpp"
#include "lanefree/lyapunov.hpp"
#include "lanefree/rng.hpp"

namespace lanefree::verify {

using potentials::BoundaryPotentialParams;
using potentials::GainShaping;
using potentials::VehiclePotentialParams;

bool SuiteReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::vector<std::string> suite_names() {
  return {"gradients", "dissipation", "collision", "barriers", "bounds"};
}

namespace {

double relative_error(double fd, double analytic) {
  if (analytic == 0.0) return std::abs(fd);
  return std::abs(fd - analytic) / std::abs(analytic);
}

void record(GradientStats& stats, double rel, double x) {
  ++stats.samples;
  if (rel > stats.worst_rel) {
    stats.worst_rel = rel;
    stats.worst_at = x;
  }
}

Check at_most(std::string name, double measured, double tolerance) {
  return {std::move(name), measured, tolerance, measured <= tolerance};
}

Check at_least(std::string name, double measured, double tolerance) {
  return {std::move(name), measured, tolerance, measured >= tolerance};
}

std::vector<VehicleState> integrate(std::vector<VehicleState> fleet,
                                    const controller::ControllerParams& params, double span,
                                    int substeps) {
  FleetState state{std::move(fleet), 0.0};
  const double dt = span / substeps;
  for (int k = 0; k < substeps; ++k) state = sim::advance(state, params, dt).next;
  return std::move(state.vehicles);
}

bool barrier_active(std::span<const VehicleState> fleet, const controller::ControllerParams& p) {
  for (const auto& s : fleet) {
    if (std::abs(s.theta) > 0.9 * p.road.phi || std::abs(s.y) > p.road.a - 0.25) return true;
  }
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    for (std::size_t j = i + 1; j < fleet.size(); ++j) {
      const double d =
          geometry::elliptic_distance({fleet[i].x, fleet[i].y}, {fleet[j].x, fleet[j].y}, p.p);
      if (d < p.L + 1.0) return true;
    }
  }
  return false;
}

// Random admissible fleets that exercise the barriers: tight spacing, wide
// orientations and speeds.
std::vector<std::vector<VehicleState>> stress_fleets(const sim::SimConfig& base, int count) {
  std::vector<std::vector<VehicleState>> out;
  sim::SimConfig c = base;
  c.n = 6;
  c.ic.x_span = 60.0;
  c.ic.lateral_margin = 0.3;
  c.ic.y_max = c.params.road.a;
  c.ic.separation_margin = 0.3;
  c.ic.v_min = 0.05 * c.params.road.v_max;
  c.ic.v_max = 0.99 * c.params.road.v_max;
  c.ic.theta_min = -0.95 * c.params.road.phi;
  c.ic.theta_max = 0.95 * c.params.road.phi;
  for (int k = 0; k < count; ++k) {
    c.seed = base.seed + 1000 + static_cast<std::uint64_t>(k);
    out.push_back(sim::generate_scenario(c).vehicles);
  }
  return out;
}

SuiteReport gradients_suite(const sim::SimConfig& config) {
  const auto& p = config.params;
  constexpr std::size_t kSamples = 1000;
  constexpr double kTol = 1e-6;
  SuiteReport r{"gradients", {}};
  const auto v = check_vehicle_gradient(p.vehicle(), kSamples, config.seed);
  const auto u = check_boundary_gradient(p.boundary(), kSamples, config.seed + 1);
  const auto f = check_shaping_gradient(p.shaping(), kSamples, config.seed + 2);
  r.checks.push_back(at_most("dV vs central difference (worst relative error)", v.worst_rel, kTol));
  r.checks.push_back(at_most("dU vs central difference (worst relative error)", u.worst_rel, kTol));
  r.checks.push_back(at_most("df vs central difference (worst relative error)", f.worst_rel, kTol));
  return r;
}

SuiteReport dissipation_suite(const sim::SimConfig& config) {
  const std::vector<double> h = {1e-2, 5e-3, 2.5e-3};
  const auto study = dissipation_study(dissipation_scenario(config), h, 20.0, 0.5);
  SuiteReport r{"dissipation", {}};
  r.checks.push_back(at_most("|dH/dt (central difference, h = 2.5e-3) - dissipation rate|",
                             study.worst_error_smallest_h, 1e-6));
  r.checks.push_back(at_least("observed convergence order (min)", study.min_order, 1.8));
  r.checks.push_back(at_most("observed convergence order (max)", study.max_order, 2.2));
  return r;
}

SuiteReport collision_suite(const sim::SimConfig& config) {
  const auto& p = config.params;
  SuiteReport r{"collision", {}};
  const auto cases = collision_cases(p.sigma, p.road.phi, p.p, 801, 20, config.seed);
  const auto& first = cases.front();
  r.checks.push_back(at_most("configured geometry: brute-force max / closed form - 1",
                             first.d_max / first.L - 1.0, 1e-9));
  r.checks.push_back(at_least("configured geometry: brute-force max / closed form",
                              first.d_max / first.L, 1.0 - 1e-3));
  double worst_over = -1.0;
  double worst_under = 2.0;
  for (std::size_t k = 1; k < cases.size(); ++k) {
    worst_over = std::max(worst_over, cases[k].d_max / cases[k].L - 1.0);
    worst_under = std::min(worst_under, cases[k].d_max / cases[k].L);
  }
  r.checks.push_back(at_most("20 random (phi, p): max(brute force / closed form) - 1",
                             worst_over, 1e-9));
  r.checks.push_back(at_least("20 random (phi, p): min(brute force / closed form)", worst_under,
                              1.0 - 1e-3));

  // Segments whose reference points are just beyond L never touch.
  SplitMix64 rng(config.seed + 7);
  const double L = geometry::safety_distance(p.sigma, p.road.phi, p.p);
  int hits = 0;
  constexpr int kDraws = 100000;
  for (int k = 0; k < kDraws; ++k) {
    const double t1 = rng.uniform(-p.road.phi, p.road.phi);
    const double t2 = rng.uniform(-p.road.phi, p.road.phi);
    const double psi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double d = L * (1.0 + 1e-9) + rng.uniform(0.0, 0.2 * L);
    const Point2 b1{d * std::cos(psi), d * std::sin(psi) / std::sqrt(p.p)};
    const Point2 a1{0.0, 0.0};
    const Point2 a2{p.sigma * std::cos(t1), p.sigma * std::sin(t1)};
    const Point2 b2{b1.x + p.sigma * std::cos(t2), b1.y + p.sigma * std::sin(t2)};
    if (geometry::segments_intersect(a1, a2, b1, b2)) ++hits;
  }
  r.checks.push_back(at_most("segment intersections beyond L (1e5 random pairs)", hits, 0.0));
  return r;
}

SuiteReport barriers_suite(const sim::SimConfig& config) {
  const auto& p = config.params;
  const auto vp = p.vehicle();
  const auto bp = p.boundary();
  SuiteReport r{"barriers", {}};

  double rho_res = 0.0;
  double kappa_res = 0.0;
  double omega_res = 0.0;
  bool monotone = true;
  double prev_rho = p.lambda;
  double prev_kappa = 0.0;
  double prev_omega = 0.0;
  const double cphi = std::cos(p.road.phi);
  for (int k = 0; k <= 140; ++k) {
    const double s = std::pow(10.0, -8.0 + 0.1 * k);
    const double rho = potentials::barrier_rho(s, vp);
    const double kappa = potentials::barrier_kappa(s, bp);
    const double omega = potentials::barrier_omega(s, p.A, p.road.phi);
    // Residual in units of what double precision can resolve: 1e-12 max(1, s)
    // plus the change of the potential across two ulps of its argument.
    const auto V = potentials::vehicle_potential(rho, vp);
    const auto U = potentials::boundary_potential(kappa, bp);
    const double ulp_rho = std::nextafter(rho, 2.0 * rho) - rho;
    const double ulp_kappa = std::nextafter(kappa, 2.0 * kappa) - kappa;
    rho_res = std::max(rho_res, std::abs(V.value - s) / (1e-12 * std::max(1.0, s) +
                                                         2.0 * std::abs(V.slope) * ulp_rho));
    kappa_res = std::max(kappa_res, std::abs(U.value - s) / (1e-12 * std::max(1.0, s) +
                                                             2.0 * std::abs(U.slope) * ulp_kappa));
    const double expect = p.A * (1.0 - cphi) / (p.A + (1.0 - cphi) * s);
    omega_res = std::max(omega_res, std::abs((std::cos(omega) - cphi) - expect) / expect);
    monotone = monotone && rho <= prev_rho && kappa >= prev_kappa && omega >= prev_omega;
    prev_rho = rho;
    prev_kappa = kappa;
    prev_omega = omega;
  }
  r.checks.push_back(
      at_most("V(rho(s)) = s residual / resolvable error, s in [1e-8, 1e6]", rho_res, 1.0));
  r.checks.push_back(
      at_most("U(kappa(s)) = s residual / resolvable error, s in [1e-8, 1e6]", kappa_res, 1.0));
  r.checks.push_back(at_most("cos(omega(s)) relative residual", omega_res, 1e-9));
  r.checks.push_back(at_least("rho non-increasing, kappa and omega non-decreasing",
                              monotone ? 1.0 : 0.0, 1.0));

  int violations = 0;
  for (const auto& fleet : stress_fleets(config, 200)) {
    const double H = lyapunov::energy_H(fleet, p).H;
    const double omega = potentials::barrier_omega(H, p.A, p.road.phi);
    const double kappa = potentials::barrier_kappa(H, bp);
    const double rho = potentials::barrier_rho(H, vp);
    for (std::size_t i = 0; i < fleet.size(); ++i) {
      if (std::abs(fleet[i].theta) > omega || std::abs(fleet[i].y) > kappa) ++violations;
      for (std::size_t j = i + 1; j < fleet.size(); ++j) {
        const double d = geometry::elliptic_distance({fleet[i].x, fleet[i].y},
                                                     {fleet[j].x, fleet[j].y}, p.p);
        if (d < rho) ++violations;
      }
    }
  }
  r.checks.push_back(
      at_most("energy-implied bounds on 200 random admissible fleets (violations)", violations, 0));
  return r;
}

SuiteReport bounds_suite(const sim::SimConfig& config) {
  const auto& p = config.params;
  const int m = config.effective_m();
  SuiteReport r{"bounds", {}};

  const double f0 = potentials::gain_shaping(0.0, p.shaping()).value;
  const double vmax = p.road.v_max;
  const double vs = p.road.v_star;
  const double R0_expect = p.mu2 + vmax * p.A * f0 / (p.A * vs * (vmax - vs));
  r.checks.push_back(at_most("R(0) against mu2 + v_max f(0) / (v* (v_max - v*))",
                             std::abs(lyapunov::gain_bound_R(0.0, p, m) - R0_expect) / R0_expect,
                             1e-12));
  bool monotone = true;
  double prev = lyapunov::gain_bound_R(0.0, p, m);
  for (int k = 0; k <= 90; ++k) {
    const double s = std::pow(10.0, -6.0 + 0.1 * k);
    const double R = lyapunov::gain_bound_R(s, p, m);
    monotone = monotone && R >= prev && R >= p.mu2;
    prev = R;
  }
  r.checks.push_back(at_least("R non-decreasing and >= mu2 on s in [1e-6, 1e3]",
                              monotone ? 1.0 : 0.0, 1.0));

  int k_bad = 0;
  int F_bad = 0;
  int u_bad = 0;
  for (const auto& fleet : stress_fleets(config, 200)) {
    const auto controls = controller::evaluate_fleet(fleet, p);
    const double H = lyapunov::energy_report(fleet, controls, p).H;
    const double R = lyapunov::gain_bound_R(H, p, m);
    for (const auto& c : controls) {
      if (c.k < p.mu2 || c.k > R) ++k_bad;
      if (std::abs(c.F) > R * vmax) ++F_bad;
      if (std::abs(c.u) > lyapunov::turning_rate_bound(H, c.k, p, m)) ++u_bad;
    }
  }
  r.checks.push_back(at_most("mu2 <= k <= R(H) on 200 random fleets (violations)", k_bad, 0));
  r.checks.push_back(at_most("|F| <= R(H) v_max on 200 random fleets (violations)", F_bad, 0));
  r.checks.push_back(at_most("|u| <= turning-rate bound on 200 random fleets (violations)", u_bad,
                             0));
  return r;
}

}  // namespace

GradientStats check_vehicle_gradient(const VehiclePotentialParams& params, std::size_t samples,
                                     std::uint64_t seed) {
  SplitMix64 rng(seed);
  GradientStats stats;
  const auto V = [&](double d) { return potentials::vehicle_potential(d, params).value; };
  while (stats.samples < samples) {
    const double d = rng.uniform(params.L, params.lambda + 5.0);
    if (d <= params.L) continue;
    const double edge = std::abs(d - params.lambda);
    const double h = std::min(1e-3 * (d - params.L), 0.25 * edge);
    if (!(h > 1e-9)) continue;
    const double fd = derivative(V, d, h);
    record(stats, relative_error(fd, potentials::vehicle_potential(d, params).slope), d);
  }
  return stats;
}

GradientStats check_boundary_gradient(const BoundaryPotentialParams& params, std::size_t samples,
                                      std::uint64_t seed) {
  SplitMix64 rng(seed);
  GradientStats stats;
  const double flat = params.flat_half_width();
  const auto U = [&](double y) { return potentials::boundary_potential(y, params).value; };
  while (stats.samples < samples) {
    const double y = rng.uniform(-params.a, params.a);
    const double ay = std::abs(y);
    if (ay >= params.a) continue;
    const double h = std::min({1e-3, 1e-2 * std::abs(ay - flat), 1e-2 * (params.a - ay)});
    if (!(h > 1e-12)) continue;
    const double fd = derivative(U, y, h);
    record(stats, relative_error(fd, potentials::boundary_potential(y, params).slope), y);
  }
  return stats;
}

GradientStats check_shaping_gradient(const GainShaping& shaping, std::size_t samples,
                                     std::uint64_t seed) {
  SplitMix64 rng(seed);
  GradientStats stats;
  const auto f = [&](double x) { return potentials::gain_shaping(x, shaping).value; };
  while (stats.samples < samples) {
    const double x = rng.uniform(-1.0, 1.0);
    const double h = std::min({1e-3, 0.25 * std::abs(x + shaping.eps), 0.25 * std::abs(x)});
    if (!(h > 1e-12)) continue;
    const double fd = derivative(f, x, h);
    record(stats, relative_error(fd, potentials::gain_shaping(x, shaping).slope), x);
  }
  return stats;
}

sim::SimConfig dissipation_scenario(const sim::SimConfig& base) {
  sim::SimConfig c = base;
  c.n = 5;
  c.ic.x_span = 200.0;
  return c;
}

DissipationStudy dissipation_study(const sim::SimConfig& config, std::span<const double> h,
                                   double horizon, double anchor_every) {
  constexpr int kSubsteps = 32;
  const auto& params = config.params;
  DissipationStudy study;
  study.h.assign(h.begin(), h.end());
  study.worst_error.assign(h.size(), 0.0);
  study.min_order = std::numeric_limits<double>::infinity();
  study.max_order = -std::numeric_limits<double>::infinity();

  FleetState fleet = sim::generate_scenario(config);
  const auto per_anchor = static_cast<std::size_t>(std::llround(anchor_every / config.dt));
  const auto anchors = static_cast<std::size_t>(std::floor(horizon / anchor_every + 1e-9));
  for (std::size_t a = 1; a <= anchors; ++a) {
    for (std::size_t k = 0; k < per_anchor; ++k) {
      fleet = sim::advance(fleet, params, config.dt).next;
    }
    DissipationAnchor anchor;
    anchor.t = fleet.t;
    const auto commands = controller::control_step(fleet.vehicles, params);
    anchor.rate = lyapunov::dissipation_rate(fleet.vehicles, commands, params);
    anchor.barrier_active = barrier_active(fleet.vehicles, params);
    for (double step : study.h) {
      const auto ahead = integrate(fleet.vehicles, params, step, kSubsteps);
      const auto behind = integrate(fleet.vehicles, params, -step, kSubsteps);
      const double fd =
          (lyapunov::energy_H(ahead, params).H - lyapunov::energy_H(behind, params).H) /
          (2.0 * step);
      anchor.error.push_back(std::abs(fd - anchor.rate));
    }
    if (!anchor.barrier_active) {
      for (std::size_t k = 0; k < anchor.error.size(); ++k) {
        study.worst_error[k] = std::max(study.worst_error[k], anchor.error[k]);
      }
    }
    study.anchors.push_back(std::move(anchor));
  }
  study.worst_error_smallest_h = study.worst_error.back();
  for (std::size_t k = 0; k + 1 < study.h.size(); ++k) {
    const double order = std::log(study.worst_error[k] / study.worst_error[k + 1]) /
                         std::log(study.h[k] / study.h[k + 1]);
    study.orders.push_back(order);
    study.min_order = std::min(study.min_order, order);
    study.max_order = std::max(study.max_order, order);
  }
  return study;
}

std::vector<CollisionCase> collision_cases(double sigma, double phi, double p, int grid,
                                     int random_cases, std::uint64_t seed) {
  std::vector<std::pair<double, double>> inputs = {{phi, p}};
  SplitMix64 rng(seed);
  for (int k = 0; k < random_cases; ++k) {
    const double ph = rng.uniform(0.05, 0.7);
    inputs.emplace_back(ph, rng.uniform(1.0, 12.0));
  }
  std::vector<CollisionCase> out;
  for (const auto& [ph, pp] : inputs) {
    CollisionCase c;
    c.sigma = sigma;
    c.phi = ph;
    c.p = pp;
    c.L = geometry::safety_distance(sigma, ph, pp);
    c.d_max = geometry::max_collision_distance_bruteforce(sigma, ph, pp, grid);
    c.ok = c.d_max >= c.L * (1.0 - 1e-3) && c.d_max <= c.L * (1.0 + 1e-9);
    out.push_back(c);
  }
  return out;
}

std::vector<SuiteReport> run(std::string_view suite, const sim::SimConfig& config) {
  std::vector<SuiteReport> out;
  const bool all = suite == "all";
  if (all || suite == "gradients") out.push_back(gradients_suite(config));
  if (all || suite == "dissipation") out.push_back(dissipation_suite(config));
  if (all || suite == "collision") out.push_back(collision_suite(config));
  if (all || suite == "barriers") out.push_back(barriers_suite(config));
  if (all || suite == "bounds") out.push_back(bounds_suite(config));
  if (out.empty()) {
    throw std::invalid_argument("unknown suite '" + std::string(suite) +
                                "' (expected gradients, dissipation, collision, barriers, bounds "
                                "or all)");
  }
  return out;
}

}  // namespace lanefree::verify
