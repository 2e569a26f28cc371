#include "lanefree/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lanefree/dynamics.hpp"
#include "lanefree/errors.hpp"
#include "lanefree/kernels/pair_kernel.hpp"
#include "lanefree/potentials.hpp"

namespace lanefree::lyapunov {

namespace {

struct Columns {
  std::vector<double> xs, ys, dist, pot, fx, fy;

  explicit Columns(std::span<const VehicleState> fleet)
      : xs(fleet.size()), ys(fleet.size()), dist(fleet.size()), pot(fleet.size()),
        fx(fleet.size()), fy(fleet.size()) {
    for (std::size_t j = 0; j < fleet.size(); ++j) {
      xs[j] = fleet[j].x;
      ys[j] = fleet[j].y;
    }
  }

  // Row i restricted to j > i.
  std::size_t upper_row(std::size_t i, const ControllerParams& params) {
    const std::size_t off = i + 1;
    const std::size_t len = xs.size() - off;
    const std::span<const double> cx(xs), cy(ys);
    kernels::pair_row(xs[i], ys[i], cx.subspan(off), cy.subspan(off),
                      {params.p, params.L, params.lambda, params.q},
                      {std::span(dist).first(len), std::span(pot).first(len),
                       std::span(fx).first(len), std::span(fy).first(len)});
    return len;
  }
};

void require_in_omega(std::span<const VehicleState> fleet, const ControllerParams& params) {
  const auto verdict = dynamics::in_omega(fleet, params.road, params.L, params.p);
  if (!verdict) throw IntegrityError(verdict.describe(), verdict.vehicle, verdict.other);
}

EnergyReport energy_terms(std::span<const VehicleState> fleet, const ControllerParams& params) {
  const auto& road = params.road;
  const double cphi = std::cos(road.phi);
  const double barrier_zero = 1.0 / (1.0 - cphi);
  const auto boundary = params.boundary();

  EnergyReport r;
  for (const auto& s : fleet) {
    const double c = std::cos(s.theta);
    const double sn = std::sin(s.theta);
    const double lon = s.v * c - road.v_star;
    const double lat = s.v * sn;
    r.kinetic_long += 0.5 * lon * lon;
    r.kinetic_lat += 0.5 * lat * lat;
    r.boundary_pot += potentials::boundary_potential(s.y, boundary).value;
    r.orientation_barrier += params.A * (1.0 / (c - cphi) - barrier_zero);
  }

  Columns cols(fleet);
  r.d_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < fleet.size(); ++i) {
    const std::size_t len = cols.upper_row(i, params);
    for (std::size_t k = 0; k < len; ++k) {
      r.d_min = std::min(r.d_min, cols.dist[k]);
      r.pairwise_pot += cols.pot[k];
    }
  }
  r.H = r.kinetic_long + r.kinetic_lat + r.boundary_pot + r.pairwise_pot +
        r.orientation_barrier;
  return r;
}

}  // namespace

EnergyReport energy_report(std::span<const VehicleState> fleet,
                           std::span<const VehicleControl> controls,
                           const ControllerParams& params) {
  require_in_omega(fleet, params);
  EnergyReport r = energy_terms(fleet, params);
  double diss = 0.0;
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    const auto& s = fleet[i];
    const double lon = s.v * std::cos(s.theta) - params.road.v_star;
    const double lat = s.v * std::sin(s.theta);
    diss -= controls[i].k * lon * lon + params.mu1 * lat * lat;
  }
  r.dissipation_analytic = diss;
  return r;
}

EnergyReport energy_H(std::span<const VehicleState> fleet, const ControllerParams& params) {
  require_in_omega(fleet, params);
  const auto controls = controller::evaluate_fleet(fleet, params);
  return energy_report(fleet, controls, params);
}

double dissipation_rate(std::span<const VehicleState> fleet,
                        std::span<const ControlCommand> commands,
                        const ControllerParams& params) {
  require_in_omega(fleet, params);
  const auto& road = params.road;
  const double cphi = std::cos(road.phi);
  const auto boundary = params.boundary();
  double rate = 0.0;
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    const auto& s = fleet[i];
    const double c = std::cos(s.theta);
    const double sn = std::sin(s.theta);
    const double u = commands[i].u;
    const double F = commands[i].F;
    const auto sums = controller::repulsion_sums(i, fleet, params);
    const double gap = c - cphi;
    rate += (s.v * c - road.v_star) * (F * c - s.v * sn * u);
    rate += s.v * sn * (F * sn + s.v * c * u);
    rate += potentials::boundary_potential(s.y, boundary).slope * s.v * sn;
    rate += s.v * c * sums.sx;
    rate += params.p * s.v * sn * sums.sy;
    rate += params.A * sn * u / (gap * gap);
  }
  return rate;
}

double gain_bound_R(double s, const ControllerParams& params, int m) {
  const auto& road = params.road;
  const double cphi = std::cos(road.phi);
  const double rho = potentials::barrier_rho(s, params.vehicle());
  const double push = m * potentials::bound_b1(rho, params.vehicle());
  const double f_max = potentials::gain_shaping(push, params.shaping()).value;
  const double num = road.v_max * (params.A + s * cphi * (1.0 - cphi)) * f_max;
  const double den = params.A * road.v_star * (road.v_max - road.v_star) +
                     road.v_star * (road.v_max * cphi - road.v_star) * (1.0 - cphi) * s;
  return params.mu2 + push / road.v_star + num / den;
}

double turning_rate_bound(double s, double k, const ControllerParams& params, int m) {
  const auto& road = params.road;
  const double lateral = potentials::bound_b2(potentials::barrier_kappa(s, params.boundary()),
                                              params.boundary());
  const double rho = potentials::barrier_rho(s, params.vehicle());
  const double neighbors = m * std::sqrt(params.p) * potentials::bound_b1(rho, params.vehicle());
  return ((params.mu1 + k) * road.v_max + lateral + neighbors) / road.v_star;
}

CertifiedLimits certified_limits(double H0, const ControllerParams& params, int m) {
  CertifiedLimits lim;
  lim.H0 = H0;
  lim.m = m;
  lim.R0 = gain_bound_R(H0, params, m);
  lim.F_bound = lim.R0 * params.road.v_max;
  lim.u_bound = turning_rate_bound(H0, lim.R0, params, m);
  lim.omega0 = potentials::barrier_omega(H0, params.A, params.road.phi);
  lim.kappa0 = potentials::barrier_kappa(H0, params.boundary());
  lim.rho0 = potentials::barrier_rho(H0, params.vehicle());
  return lim;
}

Monitor::Monitor(const ControllerParams& params, int m, double H0, MonitorOptions options)
    : params_(params), options_(options), limits_(certified_limits(H0, params, m)) {}

void Monitor::fail(double t, const std::string& what) {
  if (verdict_.violations == 0) {
    verdict_.first_failure_t = t;
    verdict_.first_failure = what;
  }
  ++verdict_.violations;
}

bool Monitor::observe(double t, std::size_t step, double prev_H, const EnergyReport& now,
                      std::span<const VehicleState> fleet,
                      std::span<const VehicleControl> controls) {
  const std::size_t before = verdict_.violations;
  const double H0 = limits_.H0;
  const auto& road = params_.road;
  auto report = [&](const char* label, std::size_t i, double value) {
    std::ostringstream msg;
    msg.precision(17);
    msg << label << " (vehicle " << i << ", value " << value << ")";
    fail(t, msg.str());
  };

  if (speed_in_band_.empty()) {
    speed_in_band_.assign(fleet.size(), false);
    theta_in_band_.assign(fleet.size(), false);
    verdict_.speed_converged_at.assign(fleet.size(), std::nullopt);
    verdict_.theta_converged_at.assign(fleet.size(), std::nullopt);
  }

  const double increase = now.H - prev_H;
  if (increase > verdict_.worst_step_increase) {
    verdict_.worst_step_increase = increase;
    verdict_.worst_step_increase_t = t;
  }
  if (increase > options_.h_step_tol * (1.0 + H0)) {
    verdict_.h_nonincreasing = false;
    std::ostringstream msg;
    msg.precision(17);
    msg << "energy increased by " << increase << " in one step";
    fail(t, msg.str());
  }
  if (now.H > H0 * (1.0 + options_.h_cum_tol * static_cast<double>(step))) {
    verdict_.h_below_initial = false;
    fail(t, "energy above its initial value");
  }

  if (!(now.d_min > params_.L)) {
    verdict_.separation_ok = false;
    report("separation at or below L", 0, now.d_min);
  }
  if (now.d_min < limits_.rho0) {
    verdict_.barrier_ok = false;
    report("separation below rho(H0)", 0, now.d_min);
  }

  for (std::size_t i = 0; i < fleet.size(); ++i) {
    const auto& s = fleet[i];
    const auto& c = controls[i];
    if (!(std::abs(s.y) < road.a)) {
      verdict_.lateral_ok = false;
      report("off road", i, s.y);
    }
    if (!(s.v > 0.0 && s.v < road.v_max)) {
      verdict_.speed_ok = false;
      report("speed out of bounds", i, s.v);
    }
    if (!(std::abs(s.theta) < road.phi)) {
      verdict_.theta_ok = false;
      report("orientation out of bounds", i, s.theta);
    }
    if (std::abs(s.theta) > limits_.omega0 || std::abs(s.y) > limits_.kappa0) {
      verdict_.barrier_ok = false;
      report("orientation or lateral position beyond the energy barrier", i,
             std::abs(s.theta) > limits_.omega0 ? s.theta : s.y);
    }
    if (!(c.k >= params_.mu2 && c.k <= limits_.R0)) {
      verdict_.gain_ok = false;
      report("gain outside [mu2, R(H0)]", i, c.k);
    }
    if (!(std::abs(c.F) <= limits_.F_bound)) {
      verdict_.F_bound_ok = false;
      report("acceleration above R(H0) v_max", i, c.F);
    }
    if (!(std::abs(c.u) <= limits_.u_bound)) {
      verdict_.u_bound_ok = false;
      report("turning rate above certified bound", i, c.u);
    }

    const bool v_in = std::abs(s.v - road.v_star) < options_.v_tol;
    const bool th_in = std::abs(s.theta) < options_.theta_tol;
    if (v_in && !speed_in_band_[i]) verdict_.speed_converged_at[i] = t;
    if (!v_in) verdict_.speed_converged_at[i].reset();
    if (th_in && !theta_in_band_[i]) verdict_.theta_converged_at[i] = t;
    if (!th_in) verdict_.theta_converged_at[i].reset();
    speed_in_band_[i] = v_in;
    theta_in_band_[i] = th_in;
  }
  return verdict_.violations == before;
}

MonitorVerdict monitor_step(const EnergyReport& prev, std::span<const VehicleState> fleet,
                            const ControllerParams& params, double H0, int m, double t,
                            MonitorOptions options) {
  const auto controls = controller::evaluate_fleet(fleet, params);
  const auto now = energy_report(fleet, controls, params);
  Monitor monitor(params, m, H0, options);
  monitor.observe(t, 1, prev.H, now, fleet, controls);
  return monitor.verdict();
}

}  // namespace lanefree::lyapunov
