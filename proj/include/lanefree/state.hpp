#pragma once

#include <vector>

namespace lanefree {

/// Pose and speed of one vehicle; (x, y) is the rear-axle midpoint.
struct VehicleState {
  double x = 0.0;      // m
  double y = 0.0;      // m, |y| < a
  double theta = 0.0;  // rad, |theta| < phi
  double v = 0.0;      // m/s, 0 < v < v_max
};

struct ControlCommand {
  double u = 0.0;      // turning rate (rad/s)
  double F = 0.0;      // acceleration (m/s^2)
  double delta = 0.0;  // steering angle recovered from u (rad)
};

/// Road half-width, speed limit, set-point and orientation bound.
struct RoadSpec {
  double a = 7.2;
  double v_max = 35.0;
  double v_star = 30.0;
  double phi = 0.25;

  /// Throws ConfigError on a <= 0, v_star outside (0, v_max), phi outside
  /// (0, pi/2), or cos(phi) < v_star / v_max.
  void validate() const;
};

struct FleetState {
  std::vector<VehicleState> vehicles;
  double t = 0.0;
};

}  // namespace lanefree
