#include "lanefree/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lanefree/dynamics.hpp"
#include "lanefree/errors.hpp"
#include "lanefree/geometry.hpp"
#include "lanefree/rng.hpp"
#include "lanefree/version.hpp"

namespace lanefree::sim {

namespace {

constexpr int kMaxHalvings = 20;
constexpr long kMaxScenarioDraws = 1'000'000;

using Rates = std::vector<dynamics::VehicleRate>;

std::vector<ControlCommand> commands_of(std::span<const controller::VehicleControl> controls) {
  std::vector<ControlCommand> out;
  out.reserve(controls.size());
  for (const auto& c : controls) out.push_back(c.command());
  return out;
}

std::vector<VehicleState> offset(std::span<const VehicleState> base, const Rates& rate,
                                 double h) {
  std::vector<VehicleState> out(base.begin(), base.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].x += h * rate[i].dx;
    out[i].y += h * rate[i].dy;
    out[i].theta += h * rate[i].dtheta;
    out[i].v += h * rate[i].dv;
  }
  return out;
}

// One RK4 step; throws IntegrityError if a stage leaves the admissible set.
std::vector<VehicleState> rk4(std::span<const VehicleState> y, const ControllerParams& params,
                              double h, bool hold, std::span<const ControlCommand> first) {
  const auto first_cmds = first.empty() ? controller::control_step(y, params)
                                        : std::vector<ControlCommand>(first.begin(), first.end());
  auto stage = [&](std::span<const VehicleState> s) {
    return dynamics::state_derivative(s, hold ? std::span<const ControlCommand>(first_cmds)
                                              : controller::control_step(s, params));
  };
  const Rates k1 = dynamics::state_derivative(y, first_cmds);
  const Rates k2 = stage(offset(y, k1, 0.5 * h));
  const Rates k3 = stage(offset(y, k2, 0.5 * h));
  const Rates k4 = stage(offset(y, k3, h));

  std::vector<VehicleState> out(y.begin(), y.end());
  const double w = h / 6.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].x += w * (k1[i].dx + 2.0 * k2[i].dx + 2.0 * k3[i].dx + k4[i].dx);
    out[i].y += w * (k1[i].dy + 2.0 * k2[i].dy + 2.0 * k3[i].dy + k4[i].dy);
    out[i].theta += w * (k1[i].dtheta + 2.0 * k2[i].dtheta + 2.0 * k3[i].dtheta + k4[i].dtheta);
    out[i].v += w * (k1[i].dv + 2.0 * k2[i].dv + 2.0 * k3[i].dv + k4[i].dv);
  }
  return out;
}

bool admissible(std::span<const VehicleState> s, const ControllerParams& params) {
  return static_cast<bool>(dynamics::in_omega(s, params.road, params.L, params.p));
}

std::optional<std::vector<VehicleState>> try_substeps(std::span<const VehicleState> y,
                                                      const ControllerParams& params, double dt,
                                                      int level, bool hold) {
  const long count = 1L << level;
  const double h = dt / static_cast<double>(count);
  std::vector<VehicleState> cur(y.begin(), y.end());
  try {
    for (long s = 0; s < count; ++s) {
      cur = rk4(cur, params, h, hold, {});
      if (!admissible(cur, params)) return std::nullopt;
    }
  } catch (const IntegrityError&) {
    return std::nullopt;
  }
  return cur;
}

void require(bool ok, const char* key, const std::string& what) {
  if (!ok) throw ConfigError(what, key);
}

}  // namespace

void SimConfig::validate() const {
  params.validate();
  require(dt > 0.0 && std::isfinite(dt), "sim.dt", "time step must be positive");
  require(t_end >= 0.0 && std::isfinite(t_end), "sim.t_end", "horizon must be non-negative");
  require(n >= 1, "sim.n", "need at least one vehicle");
  require(record_stride >= 1, "sim.record_stride", "record stride must be >= 1");
  require(m == 0 || m >= 2, "sim.m", "neighbor bound m must be >= 2 (or 0 for automatic)");
  const auto& road = params.road;
  require(ic.v_min > 0.0 && ic.v_min <= ic.v_max && ic.v_max < road.v_max, "ic.v_min",
          "initial speed range must lie inside (0, v_max)");
  require(ic.theta_min > -road.phi && ic.theta_min <= ic.theta_max && ic.theta_max < road.phi,
          "ic.theta_min", "initial orientation range must lie inside (-phi, phi)");
  require(ic.lateral_margin > 0.0 && ic.lateral_margin < road.a, "ic.lateral_margin",
          "lateral margin must lie in (0, a)");
  require(ic.y_max >= 0.0, "ic.y_max", "initial lateral strip must be non-negative");
  require(ic.x_span > 0.0, "ic.x_span", "initial longitudinal span must be positive");
  require(ic.separation_margin >= 0.0, "ic.separation_margin",
          "separation margin must be non-negative");
  require(monitor.v_tol > 0.0, "monitor.v_tol", "speed band must be positive");
  require(monitor.theta_tol > 0.0, "monitor.theta_tol", "orientation band must be positive");
  require(monitor.h_step_tol >= 0.0, "monitor.h_step_tol", "energy tolerance must be >= 0");
  require(monitor.h_cum_tol >= 0.0, "monitor.h_cum_tol", "energy tolerance must be >= 0");
}

int SimConfig::effective_m() const {
  return m > 0 ? m : geometry::estimate_m(params.L, params.lambda, params.p);
}

std::size_t SimConfig::step_count() const {
  return static_cast<std::size_t>(std::llround(t_end / dt));
}

SimConfig default_config() {
  SimConfig config;
  auto& p = config.params;
  p.L = geometry::safety_distance(p.sigma, p.road.phi, p.p);
  return config;
}

std::string_view status_name(RunStatus s) {
  switch (s) {
    case RunStatus::ok:
      return "ok";
    case RunStatus::monitor_failure:
      return "monitor_failure";
    case RunStatus::integrity_failure:
      return "integrity_failure";
  }
  return "unknown";
}

FleetState generate_scenario(const SimConfig& config) {
  const auto& ic = config.ic;
  const auto& params = config.params;
  const double y_lim = std::min(ic.y_max, params.road.a - ic.lateral_margin);
  const double min_sep = params.L + ic.separation_margin;

  SplitMix64 rng(config.seed);
  FleetState fleet;
  fleet.vehicles.reserve(static_cast<std::size_t>(config.n));
  long draws = 0;
  while (fleet.vehicles.size() < static_cast<std::size_t>(config.n)) {
    if (++draws > kMaxScenarioDraws) {
      std::ostringstream msg;
      msg << "could not place " << config.n << " vehicles with separation >= " << min_sep
          << " m in a " << ic.x_span << " m x " << 2.0 * y_lim << " m box (placed "
          << fleet.vehicles.size() << " after " << kMaxScenarioDraws
          << " draws); widen ic.x_span or reduce sim.n / ic.separation_margin";
      throw ConfigError(msg.str(), "ic.x_span");
    }
    VehicleState s;
    s.x = rng.uniform(0.0, ic.x_span);
    s.y = rng.uniform(-y_lim, y_lim);
    s.v = rng.uniform(ic.v_min, ic.v_max);
    s.theta = rng.uniform(ic.theta_min, ic.theta_max);
    const bool clear = std::all_of(fleet.vehicles.begin(), fleet.vehicles.end(), [&](const auto& o) {
      return geometry::elliptic_distance({s.x, s.y}, {o.x, o.y}, params.p) >= min_sep;
    });
    if (clear) fleet.vehicles.push_back(s);
  }
  const auto verdict = dynamics::in_omega(fleet.vehicles, params.road, params.L, params.p);
  if (!verdict) throw ConfigError("generated fleet not admissible: " + verdict.describe(), "ic");
  return fleet;
}

StepOutcome advance(const FleetState& fleet, const ControllerParams& params, double dt,
                    bool hold, std::span<const controller::VehicleControl> first_stage) {
  StepOutcome out;
  out.next.t = fleet.t + dt;
  try {
    const auto first = commands_of(first_stage);
    auto next = rk4(fleet.vehicles, params, dt, hold, first);
    if (admissible(next, params)) {
      out.next.vehicles = std::move(next);
      return out;
    }
  } catch (const IntegrityError&) {
  }
  for (int level = 1; level <= kMaxHalvings; ++level) {
    if (auto next = try_substeps(fleet.vehicles, params, dt, level, hold)) {
      out.next.vehicles = std::move(*next);
      out.halvings = level;
      return out;
    }
  }
  // Report what the plain step ran into.
  std::vector<VehicleState> bad;
  try {
    bad = rk4(fleet.vehicles, params, dt / static_cast<double>(1L << kMaxHalvings), hold, {});
  } catch (const IntegrityError& e) {
    throw IntegrityError(std::string("integrator left the admissible set after ") +
                             std::to_string(kMaxHalvings) + " halvings at t = " +
                             std::to_string(fleet.t) + ": " + e.what(),
                         e.vehicle(), e.other());
  }
  const auto verdict = dynamics::in_omega(bad, params.road, params.L, params.p);
  throw IntegrityError("integrator left the admissible set after " +
                           std::to_string(kMaxHalvings) + " halvings at t = " +
                           std::to_string(fleet.t) + ": " + verdict.describe(),
                       verdict.vehicle, verdict.other);
}

FleetState rk4_step(const FleetState& fleet, const ControllerParams& params, double dt) {
  return advance(fleet, params, dt).next;
}

SimTrace run_simulation(const SimConfig& config, std::optional<FleetState> initial) {
  config.validate();
  const auto& params = config.params;

  SimTrace trace;
  trace.header.config = config;
  trace.header.version = std::string(kVersion);
  trace.header.m = config.effective_m();

  FleetState fleet = initial ? std::move(*initial) : generate_scenario(config);
  fleet.t = 0.0;
  if (fleet.vehicles.empty()) throw ConfigError("initial fleet is empty", "sim.n");
  const auto start = dynamics::in_omega(fleet.vehicles, params.road, params.L, params.p);
  if (!start) {
    trace.status = RunStatus::integrity_failure;
    trace.diagnostic = "initial fleet not admissible: " + start.describe();
    return trace;
  }

  auto controls = controller::evaluate_fleet(fleet.vehicles, params);
  auto energy = lyapunov::energy_report(fleet.vehicles, controls, params);
  lyapunov::Monitor monitor(params, trace.header.m, energy.H, config.monitor);
  trace.header.limits = monitor.limits();

  const std::size_t steps = config.step_count();
  const double tail_start = 0.9 * config.t_end;
  auto& stats = trace.stats;
  stats.global_d_min = energy.d_min;
  stats.min_v = std::numeric_limits<double>::infinity();

  bool fault_pending = config.monitor.fault_at >= 0.0;
  auto observe = [&](std::size_t step, double prev_H) {
    const double t = fleet.t;
    lyapunov::EnergyReport seen = energy;
    if (fault_pending && t >= config.monitor.fault_at) {
      seen.H = std::max(seen.H, prev_H + config.monitor.fault_dH);
      fault_pending = false;
    }
    const bool ok = monitor.observe(t, step, prev_H, seen, fleet.vehicles, controls);
    if (energy.d_min < stats.global_d_min) {
      stats.global_d_min = energy.d_min;
      stats.global_d_min_t = t;
    }
    const bool tail = t >= tail_start;
    for (std::size_t i = 0; i < controls.size(); ++i) {
      const double aF = std::abs(controls[i].F);
      const double au = std::abs(controls[i].u);
      stats.max_abs_F = std::max(stats.max_abs_F, aF);
      stats.max_abs_u = std::max(stats.max_abs_u, au);
      if (tail) {
        stats.tail_max_abs_F = std::max(stats.tail_max_abs_F, aF);
        stats.tail_max_abs_u = std::max(stats.tail_max_abs_u, au);
      }
      const auto& s = fleet.vehicles[i];
      stats.max_abs_theta = std::max(stats.max_abs_theta, std::abs(s.theta));
      stats.max_abs_y = std::max(stats.max_abs_y, std::abs(s.y));
      stats.min_v = std::min(stats.min_v, s.v);
      stats.max_v = std::max(stats.max_v, s.v);
      stats.max_k_over_R0 = std::max(stats.max_k_over_R0, controls[i].k / monitor.limits().R0);
    }
    if (step % static_cast<std::size_t>(config.record_stride) == 0 || step == steps) {
      trace.records.push_back({t, step, fleet.vehicles, controls, energy, ok});
    }
  };

  observe(0, energy.H);
  for (std::size_t step = 1; step <= steps; ++step) {
    const double prev_H = energy.H;
    try {
      auto outcome = advance(fleet, params, config.dt, config.hold_controls, controls);
      stats.halvings += static_cast<std::size_t>(outcome.halvings);
      fleet = std::move(outcome.next);
      fleet.t = static_cast<double>(step) * config.dt;
      controls = controller::evaluate_fleet(fleet.vehicles, params);
      energy = lyapunov::energy_report(fleet.vehicles, controls, params);
    } catch (const IntegrityError& e) {
      trace.status = RunStatus::integrity_failure;
      trace.diagnostic = e.what();
      break;
    }
    stats.steps = step;
    observe(step, prev_H);
  }

  trace.verdict = monitor.verdict();
  if (trace.status == RunStatus::ok && !trace.verdict.passed()) {
    trace.status = RunStatus::monitor_failure;
    std::ostringstream msg;
    msg.precision(17);
    msg << trace.verdict.violations << " monitor violation(s); first at t = "
        << trace.verdict.first_failure_t.value_or(0.0) << ": " << trace.verdict.first_failure;
    trace.diagnostic = msg.str();
  }
  return trace;
}

RunMetrics compute_metrics(const SimTrace& trace) {
  if (trace.records.empty()) throw std::invalid_argument("compute_metrics: trace has no records");
  const auto& config = trace.header.config;
  const double v_star = config.params.road.v_star;
  const double tail_start = 0.9 * config.t_end;

  RunMetrics m;
  double tail_sum = 0.0;
  std::size_t tail_count = 0;
  m.global_d_min = std::numeric_limits<double>::infinity();
  for (const auto& r : trace.records) {
    m.d_min_series.emplace_back(r.t, r.energy.d_min);
    m.global_d_min = std::min(m.global_d_min, r.energy.d_min);
    if (r.t >= tail_start) {
      tail_sum += r.energy.d_min;
      ++tail_count;
    }
  }
  // Per-step minimum is at least as tight as the recorded one.
  if (trace.stats.steps > 0 || trace.records.size() == 1) {
    m.global_d_min = std::min(m.global_d_min, trace.stats.global_d_min);
  }
  m.converged_d_min = tail_count ? tail_sum / static_cast<double>(tail_count)
                                 : trace.records.back().energy.d_min;

  m.speed_convergence_time = trace.verdict.speed_converged_at;
  m.theta_convergence_time = trace.verdict.theta_converged_at;
  m.max_abs_F = trace.stats.max_abs_F;
  m.max_abs_u = trace.stats.max_abs_u;
  m.tail_max_abs_F = trace.stats.tail_max_abs_F;
  m.tail_max_abs_u = trace.stats.tail_max_abs_u;

  const auto& last = trace.records.back();
  for (const auto& s : last.states) {
    m.final_y.push_back(s.y);
    m.final_max_abs_theta = std::max(m.final_max_abs_theta, std::abs(s.theta));
    m.final_max_speed_error = std::max(m.final_max_speed_error, std::abs(s.v - v_star));
  }
  m.speeds_converged = m.final_max_speed_error < config.monitor.v_tol;
  m.thetas_converged = m.final_max_abs_theta < config.monitor.theta_tol;
  m.inputs_settled = m.tail_max_abs_F <= 1e-3 * m.max_abs_F &&
                     m.tail_max_abs_u <= 1e-3 * m.max_abs_u;
  return m;
}

}  // namespace lanefree::sim
