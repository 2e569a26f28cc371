#pragma once

// Self-check suites: analytic derivatives against finite differences, the
// energy dissipation identity along closed-loop trajectories, the collision
// geometry oracle, the energy-implied barrier bounds and the gain bounds.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lanefree/potentials.hpp"
#include "lanefree/sim.hpp"

namespace lanefree::verify {

struct Check {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct SuiteReport {
  std::string suite;
  std::vector<Check> checks;

  bool passed() const;
};

/// gradients, dissipation, collision, barriers, bounds.
std::vector<std::string> suite_names();

/// Runs one suite, or every suite for "all". Throws std::invalid_argument
/// for unknown names.
std::vector<SuiteReport> run(std::string_view suite, const sim::SimConfig& config);

/// Richardson-extrapolated central difference, O(h^4).
template <class F>
double derivative(F&& f, double x, double h) {
  const double d1 = (f(x + h) - f(x - h)) / (2.0 * h);
  const double d2 = (f(x + 0.5 * h) - f(x - 0.5 * h)) / h;
  return (4.0 * d2 - d1) / 3.0;
}

struct GradientStats {
  std::size_t samples = 0;
  double worst_rel = 0.0;
  double worst_at = 0.0;
};

/// Relative error |fd - analytic| / |analytic| (|fd| where the analytic
/// slope is zero) at `samples` random in-domain points. The difference step
/// stays clear of kinks and domain ends so the stencil sees one smooth branch.
GradientStats check_vehicle_gradient(const potentials::VehiclePotentialParams& params,
                                     std::size_t samples, std::uint64_t seed);
GradientStats check_boundary_gradient(const potentials::BoundaryPotentialParams& params,
                                      std::size_t samples, std::uint64_t seed);
GradientStats check_shaping_gradient(const potentials::GainShaping& shaping, std::size_t samples,
                                     std::uint64_t seed);

/// Central difference of H along the closed loop, (H(t+h) - H(t-h)) / 2h,
/// against dissipation_rate at anchor states of a seeded run.
struct DissipationAnchor {
  double t = 0.0;
  double rate = 0.0;
  bool barrier_active = false;
  std::vector<double> error;  // one per step size
};

struct DissipationStudy {
  std::vector<double> h;
  std::vector<DissipationAnchor> anchors;
  std::vector<double> worst_error;      // per step size, over anchors not barrier-active
  double worst_error_smallest_h = 0.0;
  std::vector<double> orders;           // log(E_k / E_k+1) / log(h_k / h_k+1)
  double min_order = 0.0;
  double max_order = 0.0;
};

/// Barrier-active anchors: a pair within 1 m of L, or a vehicle with
/// |theta| > 0.9 phi or |y| > a - 0.25.
/// `h` must be decreasing. Anchors are taken every `anchor_every` seconds
/// over [anchor_every, horizon].
DissipationStudy dissipation_study(const sim::SimConfig& config, std::span<const double> h,
                                   double horizon, double anchor_every);

/// The 5-vehicle scenario used by the dissipation suite: the configured
/// initial conditions packed into 200 m so that vehicles interact.
sim::SimConfig dissipation_scenario(const sim::SimConfig& base);

struct CollisionCase {
  double sigma = 0.0;
  double phi = 0.0;
  double p = 0.0;
  double L = 0.0;
  double d_max = 0.0;
  bool ok = false;  // d_max in [L (1 - 1e-3), L (1 + 1e-9)]
};

/// The given (sigma, phi, p) followed by `random_cases` draws of
/// phi in [0.05, 0.7], p in [1, 12].
std::vector<CollisionCase> collision_cases(double sigma, double phi, double p, int grid,
                                     int random_cases, std::uint64_t seed);

}  // namespace lanefree::verify
