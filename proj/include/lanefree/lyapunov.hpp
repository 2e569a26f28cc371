#pragma once

// Energy/barrier function of the closed loop, its dissipation, the certified
// gain bound R, and runtime monitors for the invariance and bound guarantees.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lanefree/controller.hpp"
#include "lanefree/state.hpp"

namespace lanefree::lyapunov {

using controller::ControllerParams;
using controller::VehicleControl;

struct EnergyReport {
  double H = 0.0;
  double kinetic_long = 0.0;         // 1/2 sum (v cos - v*)^2
  double kinetic_lat = 0.0;          // 1/2 sum v^2 sin^2
  double boundary_pot = 0.0;         // sum U(y)
  double pairwise_pot = 0.0;         // sum_{i<j} V(d_ij)
  double orientation_barrier = 0.0;  // A sum (1/(cos - cos phi) - 1/(1 - cos phi))
  double dissipation_analytic = 0.0; // -sum k (v cos - v*)^2 - mu1 sum v^2 sin^2
  double d_min = 0.0;                // min pairwise elliptic distance (+inf for n < 2)
};

/// Throws IntegrityError outside the admissible set.
EnergyReport energy_H(std::span<const VehicleState> fleet, const ControllerParams& params);

/// Same, reusing controls already evaluated on this exact fleet.
EnergyReport energy_report(std::span<const VehicleState> fleet,
                           std::span<const VehicleControl> controls,
                           const ControllerParams& params);

/// grad H(w) . w_dot for the given commands, expanded term by term from the
/// kinematics. For commands produced by control_step on `fleet` this equals
/// -sum k (v cos - v*)^2 - mu1 sum v^2 sin^2; for any other commands it is
/// still the exact instantaneous rate of change of H.
double dissipation_rate(std::span<const VehicleState> fleet,
                        std::span<const ControlCommand> commands,
                        const ControllerParams& params);

/// Certified upper bound on every k_i while H <= s.
double gain_bound_R(double s, const ControllerParams& params, int m);

/// Per-state turning-rate bound
/// (1/v*)((mu1 + k) v_max + b2(kappa(s)) + m sqrt(p) b1(rho(s))).
double turning_rate_bound(double s, double k, const ControllerParams& params, int m);

/// Everything implied by the initial energy H0.
struct CertifiedLimits {
  double H0 = 0.0;
  int m = 2;
  double R0 = 0.0;        // gain_bound_R(H0)
  double F_bound = 0.0;   // R0 v_max
  double u_bound = 0.0;   // turning_rate_bound(H0, R0)
  double omega0 = 0.0;    // |theta| bound
  double kappa0 = 0.0;    // |y| bound
  double rho0 = 0.0;      // d bound
};

CertifiedLimits certified_limits(double H0, const ControllerParams& params, int m);

struct MonitorOptions {
  double h_step_tol = 1e-8;  // per-step H increase allowed, times (1 + H0)
  double h_cum_tol = 1e-8;   // H(t) <= H0 (1 + h_cum_tol * steps)
  double v_tol = 0.1;        // convergence band for |v - v*|
  double theta_tol = 0.01;   // convergence band for |theta|
  // Fault injection for exercising the failure path: at the first step with
  // t >= fault_at the run loop reports H = (previous H) + fault_dH to the
  // monitor. Negative fault_at disables it; the trajectory is untouched.
  double fault_at = -1.0;
  double fault_dH = 1e-3;
};

struct MonitorVerdict {
  bool h_nonincreasing = true;
  double worst_step_increase = 0.0;
  double worst_step_increase_t = 0.0;
  bool h_below_initial = true;
  bool separation_ok = true;
  bool lateral_ok = true;
  bool speed_ok = true;
  bool theta_ok = true;
  bool gain_ok = true;      // mu2 <= k_i <= R(H0)
  bool F_bound_ok = true;   // |F_i| <= R(H0) v_max
  bool u_bound_ok = true;   // |u_i| <= turning_rate_bound(H0, R(H0))
  bool barrier_ok = true;   // |theta| <= omega(H0), |y| <= kappa(H0), d >= rho(H0)
  std::size_t violations = 0;
  std::optional<double> first_failure_t;
  std::string first_failure;
  // Start of the final uninterrupted stretch inside the convergence band;
  // empty if the vehicle is outside the band at the last observed step.
  std::vector<std::optional<double>> speed_converged_at;
  std::vector<std::optional<double>> theta_converged_at;

  bool passed() const { return violations == 0; }
};

/// Accumulates verdicts over a run. Confined to the simulation thread.
class Monitor {
 public:
  Monitor(const ControllerParams& params, int m, double H0, MonitorOptions options = {});

  const CertifiedLimits& limits() const { return limits_; }
  const MonitorVerdict& verdict() const { return verdict_; }
  const MonitorOptions& options() const { return options_; }

  /// Checks one accepted state at time t (step index `step`, 0 for the
  /// initial state). `prev_H` is H at the previous accepted state.
  /// Returns true if this state passed every check.
  bool observe(double t, std::size_t step, double prev_H, const EnergyReport& now,
               std::span<const VehicleState> fleet, std::span<const VehicleControl> controls);

 private:
  void fail(double t, const std::string& what);

  ControllerParams params_;
  MonitorOptions options_;
  CertifiedLimits limits_;
  MonitorVerdict verdict_;
  std::vector<bool> speed_in_band_;
  std::vector<bool> theta_in_band_;
};

/// One-shot monitor check of `fleet` against the energy `prev` of the
/// preceding state, with the limits implied by H0.
MonitorVerdict monitor_step(const EnergyReport& prev, std::span<const VehicleState> fleet,
                            const ControllerParams& params, double H0, int m, double t,
                            MonitorOptions options = {});

}  // namespace lanefree::lyapunov
