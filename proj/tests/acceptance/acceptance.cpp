// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "lanefree/config.hpp"
#include "lanefree/geometry.hpp"
#include "lanefree/lyapunov.hpp"
#include "lanefree/potentials.hpp"
#include "lanefree/sim.hpp"
#include "lanefree/trace_io.hpp"
#include "lanefree/verify.hpp"

using namespace lanefree;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool passed = false;
  std::string detail;
};

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string serialize(const sim::SimTrace& trace) {
  std::ostringstream out;
  trace_io::write_trace(out, trace, sim::compute_metrics(trace));
  return out.str();
}

// The n = 10, 340 s default run, shared by criteria 5, 6, 7 and 10.
const sim::SimTrace& default_run() {
  static const sim::SimTrace trace = sim::run_simulation(sim::default_config());
  return trace;
}

Outcome geometry_numbers() {
  const auto start = Clock::now();
  const double p = geometry::optimal_eccentricity(0.25);
  const double L = geometry::safety_distance(5.0, 0.25, 5.11);
  const double N = geometry::lateral_capacity(7.2, 5.11, 5.59);
  const double ms = 1e3 * seconds_since(start);
  const bool ok = std::abs(p - 5.11) <= 0.01 && std::abs(L - 5.59) <= 0.01 &&
                  std::abs(N - 5.8) <= 0.05 && ms < 1.0;
  return {ok, fmt("p* = %.6f, L = %.6f m, N = %.6f (%.3f ms)", p, L, N, ms)};
}

Outcome collision_oracle() {
  const auto start = Clock::now();
  const auto cases = verify::collision_cases(5.0, 0.25, 5.11, 801, 20, 2024);
  const double s = seconds_since(start);
  int good = 0;
  double worst = 0.0;
  for (const auto& c : cases) {
    good += c.ok ? 1 : 0;
    worst = std::max(worst, std::abs(c.d_max - c.L) / c.L);
  }
  const bool ok = good == static_cast<int>(cases.size()) && cases.size() == 21 && s < 10.0;
  return {ok, fmt("%d/%zu cases with d_max in [L(1-1e-3), L(1+1e-9)], worst |d_max-L|/L = %.2e "
                  "(%.2f s)",
                  good, cases.size(), worst, s)};
}

Outcome gradients() {
  const auto start = Clock::now();
  const auto p = sim::default_config().params;
  const auto v = verify::check_vehicle_gradient(p.vehicle(), 1000, 11);
  const auto u = verify::check_boundary_gradient(p.boundary(), 1000, 12);
  const auto f = verify::check_shaping_gradient(p.shaping(), 1000, 13);
  const double s = seconds_since(start);
  const bool ok = v.samples == 1000 && u.samples == 1000 && f.samples == 1000 &&
                  v.worst_rel < 1e-6 && u.worst_rel < 1e-6 && f.worst_rel < 1e-6 && s < 1.0;
  return {ok, fmt("worst relative error dV %.1e, dU %.1e, df %.1e (%.3f s)", v.worst_rel,
                  u.worst_rel, f.worst_rel, s)};
}

Outcome dissipation() {
  const auto start = Clock::now();
  const std::vector<double> h = {1e-2, 5e-3, 2.5e-3};
  const auto study = verify::dissipation_study(
      verify::dissipation_scenario(sim::default_config()), h, 20.0, 0.5);
  const double s = seconds_since(start);
  std::size_t used = 0;
  for (const auto& a : study.anchors) used += a.barrier_active ? 0 : 1;
  const bool ok = used > 0 && study.min_order >= 1.8 && study.max_order <= 2.2 &&
                  study.worst_error_smallest_h < 1e-6 && s < 30.0;
  return {ok, fmt("%zu anchors, observed order %.3f..%.3f, worst error at h=2.5e-3 %.2e "
                  "(%.2f s)",
                  used, study.min_order, study.max_order, study.worst_error_smallest_h, s)};
}

Outcome reproduction() {
  const auto start = Clock::now();
  const auto& trace = default_run();
  const double s = seconds_since(start);
  const auto m = sim::compute_metrics(trace);
  const auto& st = trace.stats;
  const auto& params = trace.header.config.params;
  const double strip = params.road.a * std::sqrt(params.c - 1.0) / std::sqrt(params.c);
  double final_y = 0.0;
  for (double y : m.final_y) final_y = std::max(final_y, std::abs(y));

  const bool a = st.global_d_min > 5.59;
  const bool b = st.min_v > 0.0 && st.max_v < 35.0 && st.max_abs_theta < 0.25;
  const bool c = m.final_max_speed_error < 0.1;
  const bool d = m.final_max_abs_theta < 0.01 && st.tail_max_abs_u < 1e-3 * st.max_abs_u &&
                 st.tail_max_abs_F < 1e-3 * st.max_abs_F;
  const bool e = final_y <= strip + 0.05;
  const bool complete = trace.status != sim::RunStatus::integrity_failure &&
                        st.steps == trace.header.config.step_count();
  const bool ok = complete && a && b && c && d && e && s < 60.0;
  return {ok, fmt("(a) d_min %.3f m (b) v in [%.3f, %.3f], max|theta| %.4f (c) max|v-30| %.2e "
                  "(d) max|theta| %.2e, tail/max |u| %.1e |F| %.1e (e) max|y| %.3f <= %.3f "
                  "(%.2f s)",
                  st.global_d_min, st.min_v, st.max_v, st.max_abs_theta, m.final_max_speed_error,
                  m.final_max_abs_theta, st.tail_max_abs_u / st.max_abs_u,
                  st.tail_max_abs_F / st.max_abs_F, final_y, strip + 0.05, s)};
}

// The monitor checks every accepted step; the recorded states are checked
// again here against bounds recomputed from H(0).
Outcome certified_bounds() {
  const auto& trace = default_run();
  const auto& params = trace.header.config.params;
  const int m = trace.header.m;
  const double H0 = trace.records.front().energy.H;
  const double R0 = lyapunov::gain_bound_R(H0, params, m);
  const auto& v = trace.verdict;
  std::size_t violations = 0;
  double worst_u = 0.0;
  for (const auto& r : trace.records) {
    const double cap = H0 * (1.0 + 1e-8 * static_cast<double>(r.step));
    if (r.energy.H > cap) ++violations;
    for (const auto& c : r.controls) {
      if (c.k < params.mu2 || c.k > R0) ++violations;
      if (std::abs(c.F) > R0 * params.road.v_max) ++violations;
      const double bound = lyapunov::turning_rate_bound(H0, c.k, params, m);
      if (std::abs(c.u) > bound) ++violations;
      worst_u = std::max(worst_u, std::abs(c.u) / bound);
    }
  }
  const bool monitors = v.h_below_initial && v.h_nonincreasing && v.gain_ok && v.F_bound_ok &&
                        v.u_bound_ok;
  const bool ok = monitors && violations == 0 && trace.status == sim::RunStatus::ok;
  return {ok, fmt("%zu violations over %zu records (per-step monitors %s), R(H0) = %.4f, "
                  "max k/R(H0) = %.4f, max |u|/bound = %.2e",
                  violations, trace.records.size(), monitors ? "clean" : "tripped", R0,
                  trace.stats.max_k_over_R0, worst_u)};
}

Outcome barrier_bounds() {
  const auto& trace = default_run();
  const auto& params = trace.header.config.params;
  const double H0 = trace.records.front().energy.H;
  const double omega = potentials::barrier_omega(H0, params.A, params.road.phi);
  const double kappa = potentials::barrier_kappa(H0, params.boundary());
  const double rho = potentials::barrier_rho(H0, params.vehicle());
  std::size_t violations = 0;
  for (const auto& r : trace.records) {
    if (r.energy.d_min < rho) ++violations;
    for (const auto& s : r.states) {
      if (std::abs(s.theta) > omega) ++violations;
      if (std::abs(s.y) > kappa) ++violations;
    }
  }
  const bool ok = violations == 0 && trace.verdict.barrier_ok;
  return {ok, fmt("%zu violations; omega %.4f vs max|theta| %.4f, kappa %.3f vs max|y| %.3f, "
                  "rho %.3f vs d_min %.3f",
                  violations, omega, trace.stats.max_abs_theta, kappa, trace.stats.max_abs_y, rho,
                  trace.stats.global_d_min)};
}

Outcome lambda_sensitivity() {
  const auto start = Clock::now();
  const auto base = sim::default_config();
  const auto fleet = sim::generate_scenario(base);
  const std::vector<std::string> wide = {"potential.lambda=40"};
  const auto c40 = config::parse_config("", wide).config;
  const auto t25 = sim::run_simulation(base, fleet);
  const auto t40 = sim::run_simulation(c40, fleet);
  const double s = seconds_since(start);
  const double d25 = sim::compute_metrics(t25).converged_d_min;
  const double d40 = sim::compute_metrics(t40).converged_d_min;
  const bool ok = t25.status == sim::RunStatus::ok && t40.status == sim::RunStatus::ok &&
                  d40 > d25 && s < 120.0;
  return {ok, fmt("converged d_min %.3f m (lambda 25) < %.3f m (lambda 40) (%.2f s)", d25, d40,
                  s)};
}

// Rear vehicle 3 m/s faster and 20 m behind; the approach window is every
// recorded step at which the gap is still closing.
Outcome nudging() {
  auto config = sim::default_config();
  config.n = 2;
  config.t_end = 20.0;
  config.record_stride = 1;
  const FleetState fleet{{{0.0, 0.0, 0.0, 33.0}, {20.0, 0.5, 0.0, 30.0}}, 0.0};
  const auto trace = sim::run_simulation(config, fleet);
  std::size_t window = 0;
  std::size_t wrong = 0;
  double min_front = INFINITY;
  double max_rear = -INFINITY;
  for (std::size_t k = 0; k + 1 < trace.records.size(); ++k) {
    if (trace.records[k + 1].energy.d_min >= trace.records[k].energy.d_min) continue;
    ++window;
    const double rear = trace.records[k].controls[0].F;
    const double front = trace.records[k].controls[1].F;
    min_front = std::min(min_front, front);
    max_rear = std::max(max_rear, rear);
    if (!(front > 0.0) || !(rear < 0.0)) ++wrong;
  }
  const bool ok = trace.status == sim::RunStatus::ok && window > 0 && wrong == 0;
  return {ok, fmt("%zu approach steps, front F >= %.3e, rear F <= %.3e, %zu sign violations",
                  window, min_front, max_rear, wrong)};
}

Outcome determinism() {
  const auto first = serialize(default_run());
  const auto second = serialize(sim::run_simulation(sim::default_config()));
  const bool ok = first == second;
  return {ok, fmt("%zu-byte traces %s", first.size(), ok ? "identical" : "differ")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"geometry numbers", geometry_numbers},
      {"collision-distance oracle", collision_oracle},
      {"potential and shaping gradients", gradients},
      {"energy dissipation identity", dissipation},
      {"ten-vehicle 340 s scenario", reproduction},
      {"certified gain and input bounds", certified_bounds},
      {"energy barrier bounds", barrier_bounds},
      {"sensing-radius sensitivity", lambda_sensitivity},
      {"nudging force signs", nudging},
      {"byte-identical reruns", determinism},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.passed ? 0 : 1;
    std::printf("%s %2d %s: %s\n", o.passed ? "PASS" : "FAIL", index, name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
