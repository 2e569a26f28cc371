#pragma once

// Decentralized feedback laws. Each vehicle uses only its own speed and
// orientation, its lateral position, and elliptic distances to vehicles
// within the sensing radius.

#include <cstddef>
#include <span>
#include <vector>

#include "lanefree/potentials.hpp"
#include "lanefree/state.hpp"

namespace lanefree::controller {

struct ControllerParams {
  RoadSpec road;
  double mu1 = 0.5;    // lateral damping gain (1/s)
  double mu2 = 0.1;    // longitudinal base gain (1/s)
  double A = 1.0;      // orientation-barrier weight
  double sigma = 5.0;  // vehicle length (m)
  double p = 5.11;     // eccentricity weight
  double q = 3e-3;
  double c = 1.5;
  double lambda = 25.0;
  double L = 5.59;
  double eps = 0.2;

  potentials::VehiclePotentialParams vehicle() const { return {q, L, lambda}; }
  potentials::BoundaryPotentialParams boundary() const { return {road.a, c}; }
  potentials::GainShaping shaping() const { return {eps}; }

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

struct RepulsionSums {
  double sx = 0.0;  // sum_j V'(d_ij) (x_i - x_j) / d_ij
  double sy = 0.0;  // sum_j V'(d_ij) (y_i - y_j) / d_ij
};

/// Everything the laws compute for one vehicle, in evaluation order.
struct VehicleControl {
  RepulsionSums sums;
  double k = 0.0;
  double F = 0.0;
  double u = 0.0;
  double delta = 0.0;

  ControlCommand command() const { return {u, F, delta}; }
};

/// Neighbor sums for vehicle i, accumulated in ascending j. Pairs beyond
/// lambda contribute nothing. Throws IntegrityError if any d_ij <= L.
RepulsionSums repulsion_sums(std::size_t i, std::span<const VehicleState> fleet,
                             const ControllerParams& params);

/// State-dependent gain
///   k = mu2 + Sx/v* + v_max cos(theta) / (v* (v_max cos(theta) - v*)) f(-Sx).
double gain_k(std::size_t i, std::span<const VehicleState> fleet, const ControllerParams& params);

double longitudinal_accel(std::size_t i, std::span<const VehicleState> fleet,
                          const ControllerParams& params);

/// Turning rate; needs the acceleration F of the same vehicle and state.
double turning_rate(std::size_t i, std::span<const VehicleState> fleet,
                    const ControllerParams& params, double F);

/// arctan(sigma u / v). Throws std::domain_error for v <= 0.
double steering_angle(double u, double v, double sigma);

/// Laws for one vehicle given its precomputed neighbor sums. Throws
/// IntegrityError if the vehicle itself is outside the admissible set.
VehicleControl evaluate_vehicle(const VehicleState& s, RepulsionSums sums,
                                const ControllerParams& params, std::size_t index = 0);

/// Full evaluation for every vehicle of a frozen fleet state.
std::vector<VehicleControl> evaluate_fleet(std::span<const VehicleState> fleet,
                                           const ControllerParams& params);

std::vector<ControlCommand> control_step(std::span<const VehicleState> fleet,
                                         const ControllerParams& params);

}  // namespace lanefree::controller
