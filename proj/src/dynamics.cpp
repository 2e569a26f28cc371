#include "lanefree/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "lanefree/errors.hpp"
#include "lanefree/geometry.hpp"

namespace lanefree {

void RoadSpec::validate() const {
  if (!(a > 0.0)) throw ConfigError("road half-width must be positive", "road.a");
  if (!(v_max > 0.0)) throw ConfigError("speed limit must be positive", "road.v_max");
  if (!(v_star > 0.0 && v_star < v_max)) {
    throw ConfigError("speed set-point must lie in (0, v_max)", "road.v_star");
  }
  if (!(phi > 0.0 && phi < std::numbers::pi / 2.0)) {
    throw ConfigError("orientation bound phi must lie in (0, pi/2)", "road.phi");
  }
  if (std::cos(phi) < v_star / v_max) {
    std::ostringstream msg;
    msg << "orientation bound and speeds are incompatible: cos(phi) = " << std::cos(phi)
        << " must be >= v_star / v_max = " << v_star / v_max;
    throw ConfigError(msg.str(), "road.phi");
  }
}

namespace dynamics {

std::vector<VehicleRate> state_derivative(std::span<const VehicleState> fleet,
                                          std::span<const ControlCommand> commands) {
  if (fleet.size() != commands.size()) {
    throw std::invalid_argument("state_derivative: fleet and command counts differ");
  }
  std::vector<VehicleRate> rates(fleet.size());
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    const auto& s = fleet[i];
    rates[i] = {s.v * std::cos(s.theta), s.v * std::sin(s.theta), commands[i].u, commands[i].F};
  }
  return rates;
}

std::string_view violation_name(Violation v) {
  switch (v) {
    case Violation::none:
      return "none";
    case Violation::lateral:
      return "lateral";
    case Violation::orientation:
      return "orientation";
    case Violation::speed:
      return "speed";
    case Violation::separation:
      return "separation";
  }
  return "unknown";
}

std::string OmegaVerdict::describe() const {
  std::ostringstream out;
  out.precision(17);
  switch (kind) {
    case Violation::none:
      return "in admissible set";
    case Violation::lateral:
      out << "vehicle " << vehicle << " off road: y = " << value;
      break;
    case Violation::orientation:
      out << "vehicle " << vehicle << " orientation out of bounds: theta = " << value;
      break;
    case Violation::speed:
      out << "vehicle " << vehicle << " speed out of bounds: v = " << value;
      break;
    case Violation::separation:
      out << "vehicles " << vehicle << " and " << other << " too close: d = " << value;
      break;
  }
  return out.str();
}

OmegaVerdict in_omega(std::span<const VehicleState> fleet, const RoadSpec& road, double L,
                      double p) {
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    const auto& s = fleet[i];
    if (!(std::abs(s.y) < road.a)) return {Violation::lateral, i, i, s.y};
    if (!(std::abs(s.theta) < road.phi)) return {Violation::orientation, i, i, s.theta};
    if (!(s.v > 0.0 && s.v < road.v_max)) return {Violation::speed, i, i, s.v};
  }
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    for (std::size_t j = i + 1; j < fleet.size(); ++j) {
      const double d = geometry::elliptic_distance({fleet[i].x, fleet[i].y},
                                                   {fleet[j].x, fleet[j].y}, p);
      if (!(d > L)) return {Violation::separation, i, j, d};
    }
  }
  return {};
}

}  // namespace dynamics
}  // namespace lanefree
