#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lanefree/controller.hpp"
#include "lanefree/lyapunov.hpp"
#include "lanefree/state.hpp"

namespace lanefree::sim {

using controller::ControllerParams;

/// Sampling box for random initial fleets.
struct InitialConditions {
  double x_span = 600.0;            // x in [0, x_span)
  double y_max = 3.5;               // |y| <= min(y_max, a - lateral_margin)
  double separation_margin = 15.0;  // pairwise d >= L + margin
  double lateral_margin = 1.0;
  double v_min = 28.0;
  double v_max = 32.0;
  double theta_min = -0.01;
  double theta_max = 0.01;
};

struct SimConfig {
  double dt = 2e-3;
  double t_end = 340.0;
  std::uint64_t seed = 2;
  int n = 10;
  int record_stride = 50;
  int m = 0;                   // neighbor-count bound; 0 = geometry::estimate_m
  bool hold_controls = false;  // zero-order hold across RK stages
  bool L_explicit = false;     // L set by the user rather than derived
  ControllerParams params;
  InitialConditions ic;
  lyapunov::MonitorOptions monitor;

  /// Throws ConfigError naming the offending key.
  void validate() const;
  int effective_m() const;
  std::size_t step_count() const;
};

/// Defaults: 10 vehicles on a 14.4 m road, v_max 35, v* 30, phi 0.25,
/// sigma 5, p 5.11, L from the safety-distance formula, lambda 25, eps 0.2,
/// mu1 0.5, mu2 0.1, q 3e-3, A 1, c 1.5.
SimConfig default_config();

/// Rejection-samples an initial fleet inside the admissible set.
/// Deterministic in config.seed. Throws ConfigError after 10^6 rejected draws.
FleetState generate_scenario(const SimConfig& config);

/// Closed-loop classical RK4 step with controls re-evaluated at every stage.
/// If the result (or a stage) leaves the admissible set, the interval is
/// re-integrated with 2, 4, ... 2^20 substeps. Throws IntegrityError if that
/// still fails.
FleetState rk4_step(const FleetState& fleet, const ControllerParams& params, double dt);

struct StepOutcome {
  FleetState next;
  int halvings = 0;
};

/// rk4_step with options: `first_stage` reuses controls already evaluated
/// at `fleet`; `hold` freezes the controls over the step.
StepOutcome advance(const FleetState& fleet, const ControllerParams& params, double dt,
                    bool hold = false,
                    std::span<const controller::VehicleControl> first_stage = {});

struct TraceHeader {
  SimConfig config;
  std::string version;
  int m = 2;
  lyapunov::CertifiedLimits limits;  // H0, R(H0), and the bounds derived from them
};

struct TraceRecord {
  double t = 0.0;
  std::size_t step = 0;
  std::vector<VehicleState> states;
  std::vector<controller::VehicleControl> controls;
  lyapunov::EnergyReport energy;
  bool step_ok = true;
};

/// Per-step accumulators (every accepted step, not just recorded ones).
struct RunStats {
  std::size_t steps = 0;
  std::size_t halvings = 0;
  double global_d_min = 0.0;
  double global_d_min_t = 0.0;
  double max_abs_F = 0.0;
  double max_abs_u = 0.0;
  double tail_max_abs_F = 0.0;  // over t >= 0.9 t_end
  double tail_max_abs_u = 0.0;
  double max_abs_theta = 0.0;
  double max_abs_y = 0.0;
  double min_v = 0.0;
  double max_v = 0.0;
  double max_k_over_R0 = 0.0;
};

enum class RunStatus { ok, monitor_failure, integrity_failure };

std::string_view status_name(RunStatus s);

struct SimTrace {
  TraceHeader header;
  std::vector<TraceRecord> records;
  RunStats stats;
  lyapunov::MonitorVerdict verdict;
  RunStatus status = RunStatus::ok;
  std::string diagnostic;
};

/// Integrates from `initial` (or generate_scenario(config)) to t_end.
/// Monitors run at every accepted step; states are recorded every
/// record_stride steps and at the final step. An integrity failure stops
/// the run and returns the partial trace with status integrity_failure.
SimTrace run_simulation(const SimConfig& config,
                        std::optional<FleetState> initial = std::nullopt);

struct RunMetrics {
  std::vector<std::pair<double, double>> d_min_series;
  double global_d_min = 0.0;
  double converged_d_min = 0.0;  // mean d_min over recorded t >= 0.9 t_end
  std::vector<std::optional<double>> speed_convergence_time;
  std::vector<std::optional<double>> theta_convergence_time;
  double max_abs_F = 0.0;
  double max_abs_u = 0.0;
  double tail_max_abs_F = 0.0;
  double tail_max_abs_u = 0.0;
  std::vector<double> final_y;
  double final_max_abs_theta = 0.0;
  double final_max_speed_error = 0.0;
  bool speeds_converged = false;   // final |v - v*| < v_tol for all
  bool thetas_converged = false;   // final |theta| < theta_tol for all
  bool inputs_settled = false;     // tail |F|, |u| below 1e-3 of run maxima
};

/// Requires at least one record.
RunMetrics compute_metrics(const SimTrace& trace);

}  // namespace lanefree::sim
