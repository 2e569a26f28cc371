#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lanefree/state.hpp"

namespace lanefree::dynamics {

struct VehicleRate {
  double dx = 0.0;
  double dy = 0.0;
  double dtheta = 0.0;
  double dv = 0.0;
};

/// Bicycle kinematics: (v cos theta, v sin theta, u, F) per vehicle.
std::vector<VehicleRate> state_derivative(std::span<const VehicleState> fleet,
                                          std::span<const ControlCommand> commands);

enum class Violation { none, lateral, orientation, speed, separation };

std::string_view violation_name(Violation v);

struct OmegaVerdict {
  Violation kind = Violation::none;
  std::size_t vehicle = 0;
  std::size_t other = 0;  // second index for separation violations
  double value = 0.0;     // offending y, theta, v or d

  explicit operator bool() const { return kind == Violation::none; }
  std::string describe() const;
};

/// Membership in the admissible state set: |y| < a, |theta| < phi,
/// 0 < v < v_max and pairwise elliptic distance > L, all strict.
/// Reports the first violation in vehicle order (per-vehicle checks first).
OmegaVerdict in_omega(std::span<const VehicleState> fleet, const RoadSpec& road, double L,
                      double p);

}  // namespace lanefree::dynamics
