#include "lanefree/controller.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "lanefree/errors.hpp"
#include "lanefree/kernels/pair_kernel.hpp"

namespace lanefree::controller {

namespace {

// Scratch buffers for one pass over the fleet, structure-of-arrays so the
// pair kernel can stream x and y.
struct PairScratch {
  std::vector<double> xs, ys, dist, pot, fx, fy;

  explicit PairScratch(std::span<const VehicleState> fleet)
      : xs(fleet.size()), ys(fleet.size()), dist(fleet.size()), pot(fleet.size()),
        fx(fleet.size()), fy(fleet.size()) {
    for (std::size_t j = 0; j < fleet.size(); ++j) {
      xs[j] = fleet[j].x;
      ys[j] = fleet[j].y;
    }
  }

  kernels::PairRowOut out() { return {dist, pot, fx, fy}; }
};

kernels::PairParams pair_params(const ControllerParams& params) {
  return {params.p, params.L, params.lambda, params.q};
}

RepulsionSums row_sums(std::size_t i, PairScratch& scratch, const ControllerParams& params) {
  kernels::pair_row(scratch.xs[i], scratch.ys[i], scratch.xs, scratch.ys, pair_params(params),
                    scratch.out());
  RepulsionSums sums;
  const std::size_t n = scratch.xs.size();
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    if (!(scratch.dist[j] > params.L)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "vehicles " << i << " and " << j << " within safety distance: d = "
          << scratch.dist[j] << " <= L = " << params.L;
      throw IntegrityError(msg.str(), i, j);
    }
    if (scratch.dist[j] > params.lambda) continue;
    sums.sx += scratch.fx[j];
    sums.sy += scratch.fy[j];
  }
  return sums;
}

void require_admissible(const VehicleState& s, const ControllerParams& params, std::size_t i) {
  const auto& road = params.road;
  std::string problem;
  if (!(std::abs(s.y) < road.a)) {
    problem = "off road";
  } else if (!(std::abs(s.theta) < road.phi)) {
    problem = "orientation out of bounds";
  } else if (!(s.v > 0.0 && s.v < road.v_max)) {
    problem = "speed out of bounds";
  } else if (!(road.v_max * std::cos(s.theta) > road.v_star)) {
    problem = "v_max cos(theta) <= v_star";
  }
  if (!problem.empty()) {
    throw IntegrityError("vehicle " + std::to_string(i) + ": " + problem, i);
  }
}

}  // namespace

void ControllerParams::validate() const {
  road.validate();
  if (!(mu1 > 0.0)) throw ConfigError("mu1 must be positive", "controller.mu1");
  if (!(mu2 > 0.0)) throw ConfigError("mu2 must be positive", "controller.mu2");
  if (!(A > 0.0)) throw ConfigError("A must be positive", "controller.A");
  if (!(eps > 0.0)) throw ConfigError("eps must be positive", "controller.eps");
  if (!(sigma > 0.0)) throw ConfigError("vehicle length must be positive", "vehicle.sigma");
  if (!(p >= 1.0)) throw ConfigError("eccentricity weight p must be >= 1", "metric.p");
  if (!(q > 0.0)) throw ConfigError("q must be positive", "potential.q");
  if (!(c >= 1.0)) throw ConfigError("c must be >= 1", "potential.c");
  if (!(L > 0.0)) throw ConfigError("L must be positive", "potential.L");
  if (!(lambda > L)) throw ConfigError("lambda must exceed L", "potential.lambda");
}

RepulsionSums repulsion_sums(std::size_t i, std::span<const VehicleState> fleet,
                             const ControllerParams& params) {
  if (i >= fleet.size()) throw std::out_of_range("repulsion_sums: vehicle index");
  PairScratch scratch(fleet);
  return row_sums(i, scratch, params);
}

namespace {

double gain_from(const VehicleState& s, double sx, const ControllerParams& params) {
  const auto& road = params.road;
  const double vc = road.v_max * std::cos(s.theta);
  const double f = potentials::gain_shaping(-sx, params.shaping()).value;
  return params.mu2 + sx / road.v_star + vc / (road.v_star * (vc - road.v_star)) * f;
}

double accel_from(const VehicleState& s, double k, double sx, const ControllerParams& params) {
  const double c = std::cos(s.theta);
  return -(k / c) * (s.v * c - params.road.v_star) - sx / c;
}

double turn_from(const VehicleState& s, const RepulsionSums& sums, double F,
                 const ControllerParams& params) {
  const double st = std::sin(s.theta);
  const double gap = std::cos(s.theta) - std::cos(params.road.phi);
  const double inertia = params.road.v_star + params.A / (s.v * gap * gap);
  const double dU = potentials::boundary_potential(s.y, params.boundary()).slope;
  return -(params.mu1 * s.v * st + dU + params.p * sums.sy + st * F) / inertia;
}

}  // namespace

double gain_k(std::size_t i, std::span<const VehicleState> fleet, const ControllerParams& params) {
  require_admissible(fleet[i], params, i);
  return gain_from(fleet[i], repulsion_sums(i, fleet, params).sx, params);
}

double longitudinal_accel(std::size_t i, std::span<const VehicleState> fleet,
                          const ControllerParams& params) {
  require_admissible(fleet[i], params, i);
  const auto sums = repulsion_sums(i, fleet, params);
  return accel_from(fleet[i], gain_from(fleet[i], sums.sx, params), sums.sx, params);
}

double turning_rate(std::size_t i, std::span<const VehicleState> fleet,
                    const ControllerParams& params, double F) {
  require_admissible(fleet[i], params, i);
  return turn_from(fleet[i], repulsion_sums(i, fleet, params), F, params);
}

double steering_angle(double u, double v, double sigma) {
  if (!(v > 0.0)) throw std::domain_error("steering angle needs positive speed");
  return std::atan(sigma * u / v);
}

VehicleControl evaluate_vehicle(const VehicleState& s, RepulsionSums sums,
                                const ControllerParams& params, std::size_t index) {
  require_admissible(s, params, index);
  VehicleControl out;
  out.sums = sums;
  out.k = gain_from(s, sums.sx, params);
  out.F = accel_from(s, out.k, sums.sx, params);
  out.u = turn_from(s, sums, out.F, params);
  out.delta = steering_angle(out.u, s.v, params.sigma);
  return out;
}

std::vector<VehicleControl> evaluate_fleet(std::span<const VehicleState> fleet,
                                           const ControllerParams& params) {
  PairScratch scratch(fleet);
  std::vector<VehicleControl> out(fleet.size());
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    out[i] = evaluate_vehicle(fleet[i], row_sums(i, scratch, params), params, i);
  }
  return out;
}

std::vector<ControlCommand> control_step(std::span<const VehicleState> fleet,
                                         const ControllerParams& params) {
  const auto controls = evaluate_fleet(fleet, params);
  std::vector<ControlCommand> commands;
  commands.reserve(controls.size());
  for (const auto& c : controls) commands.push_back(c.command());
  return commands;
}

}  // namespace lanefree::controller
