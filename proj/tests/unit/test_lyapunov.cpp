#include <doctest.h>

#include <cmath>
#include <vector>

#include "lanefree/controller.hpp"
#include "lanefree/dynamics.hpp"
#include "lanefree/errors.hpp"
#include "lanefree/lyapunov.hpp"
#include "lanefree/potentials.hpp"
#include "lanefree/sim.hpp"

using namespace lanefree;
using namespace lanefree::lyapunov;

namespace {

controller::ControllerParams defaults() { return controller::ControllerParams{}; }

}  // namespace

TEST_CASE("energy of simple fleets") {
  const auto p = defaults();
  const std::vector<VehicleState> rest = {{0, 0, 0, 30}, {100, 3, 0, 30}};
  const auto e0 = energy_H(rest, p);
  CHECK(e0.H == 0.0);
  CHECK(e0.dissipation_analytic == 0.0);

  const std::vector<VehicleState> fast = {{0, 0, 0, 31}};
  CHECK(energy_H(fast, p).H == doctest::Approx(0.5).epsilon(1e-15));

  const std::vector<VehicleState> pair = {{0, 0, 0, 30}, {15, 0, 0, 30}};
  const auto ep = energy_H(pair, p);
  CHECK(ep.H == doctest::Approx(potentials::vehicle_potential(15.0, p.vehicle()).value));
  CHECK(ep.pairwise_pot == ep.H);
  CHECK(ep.d_min == 15.0);
}

TEST_CASE("energy summands add up") {
  const auto p = defaults();
  const std::vector<VehicleState> fleet = {{0, 5, 0.1, 25}, {12, -6, -0.05, 33}, {20, 0, 0, 30}};
  const auto e = energy_H(fleet, p);
  CHECK(e.kinetic_long >= 0);
  CHECK(e.kinetic_lat >= 0);
  CHECK(e.boundary_pot > 0);
  CHECK(e.pairwise_pot > 0);
  CHECK(e.orientation_barrier > 0);
  CHECK(e.H == doctest::Approx(e.kinetic_long + e.kinetic_lat + e.boundary_pot + e.pairwise_pot +
                               e.orientation_barrier)
                   .epsilon(1e-14));
  CHECK(e.dissipation_analytic < 0);
}

TEST_CASE("energy outside the admissible set is an integrity failure") {
  const auto p = defaults();
  const std::vector<VehicleState> off_road = {{0, 7.3, 0, 30}};
  CHECK_THROWS_AS(energy_H(off_road, p), IntegrityError);
}

TEST_CASE("dissipation: gradient route equals the closed form") {
  const auto p = defaults();
  auto c = sim::default_config();
  c.n = 8;
  c.ic.x_span = 80;
  c.ic.separation_margin = 0.5;
  c.ic.y_max = 6.5;
  c.ic.v_min = 3;
  c.ic.v_max = 34.5;
  c.ic.theta_min = -0.2;
  c.ic.theta_max = 0.2;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    c.seed = seed;
    const auto fleet = sim::generate_scenario(c).vehicles;
    const auto controls = controller::evaluate_fleet(fleet, p);
    const auto cmds = controller::control_step(fleet, p);
    const double rate = dissipation_rate(fleet, cmds, p);
    const double closed = energy_report(fleet, controls, p).dissipation_analytic;
    CAPTURE(seed);
    CHECK(rate <= 1e-12 * std::abs(closed));
    CHECK(rate == doctest::Approx(closed).epsilon(1e-9));
  }
}

TEST_CASE("dissipation_rate is the directional derivative of H for arbitrary commands") {
  const auto p = defaults();
  const std::vector<VehicleState> fleet = {
      {0, 1.0, 0.05, 28}, {12, 4.5, -0.1, 32}, {20, -5.0, 0.02, 30.5}};
  auto cmds = controller::control_step(fleet, p);
  cmds[0].F += 0.3;
  cmds[1].u -= 0.02;
  cmds[2].u += 0.01;
  const auto rates = dynamics::state_derivative(fleet, cmds);
  auto H_along = [&](double h) {
    auto moved = fleet;
    for (std::size_t i = 0; i < moved.size(); ++i) {
      moved[i].x += h * rates[i].dx;
      moved[i].y += h * rates[i].dy;
      moved[i].theta += h * rates[i].dtheta;
      moved[i].v += h * rates[i].dv;
    }
    return energy_H(moved, p).H;
  };
  const double h = 1e-4;
  const double fd1 = (H_along(h) - H_along(-h)) / (2 * h);
  const double fd2 = (H_along(h / 2) - H_along(-h / 2)) / h;
  const double fd = (4 * fd2 - fd1) / 3;
  const double rate = dissipation_rate(fleet, cmds, p);
  const double closed = energy_H(fleet, p).dissipation_analytic;
  CHECK(rate == doctest::Approx(fd).epsilon(1e-7));
  CHECK(std::abs(rate - closed) > 1e-2);
}

TEST_CASE("dissipation of a single fast vehicle is -k") {
  const auto p = defaults();
  const std::vector<VehicleState> fleet = {{0, 0, 0, 31}};
  const auto cmds = controller::control_step(fleet, p);
  const double k = controller::gain_k(0, fleet, p);
  CHECK(dissipation_rate(fleet, cmds, p) == doctest::Approx(-k).epsilon(1e-14));
}

TEST_CASE("gain bound R") {
  const auto p = defaults();
  CHECK(gain_bound_R(0.0, p, 98) == doctest::Approx(0.1 + 35.0 * 0.1 / 150.0).epsilon(1e-14));
  double prev = 0.0;
  for (double s = 1e-6; s <= 1e3; s *= 1.5) {
    const double R = gain_bound_R(s, p, 98);
    CHECK(R >= prev);
    CHECK(R >= p.mu2);
    prev = R;
  }
  CHECK(gain_bound_R(1.0, p, 10) < gain_bound_R(1.0, p, 98));
}

TEST_CASE("certified limits") {
  const auto p = defaults();
  const auto lim = certified_limits(2.0, p, 98);
  CHECK(lim.H0 == 2.0);
  CHECK(lim.R0 == gain_bound_R(2.0, p, 98));
  CHECK(lim.F_bound == lim.R0 * p.road.v_max);
  CHECK(lim.u_bound == turning_rate_bound(2.0, lim.R0, p, 98));
  CHECK(lim.omega0 == potentials::barrier_omega(2.0, p.A, p.road.phi));
  CHECK(lim.kappa0 == potentials::barrier_kappa(2.0, p.boundary()));
  CHECK(lim.rho0 == potentials::barrier_rho(2.0, p.vehicle()));
}

TEST_CASE("monitor accepts an equilibrium trajectory") {
  const auto p = defaults();
  const std::vector<VehicleState> fleet = {{0, 0, 0, 30}, {50, 2, 0, 30}};
  const auto controls = controller::evaluate_fleet(fleet, p);
  const auto e = energy_report(fleet, controls, p);
  Monitor m(p, 98, e.H);
  for (std::size_t step = 0; step < 5; ++step) {
    CHECK(m.observe(0.1 * step, step, e.H, e, fleet, controls));
  }
  CHECK(m.verdict().passed());
  CHECK(m.verdict().speed_converged_at[0] == 0.0);
  CHECK(m.verdict().theta_converged_at[1] == 0.0);
}

TEST_CASE("monitor flags an injected energy increase with its time") {
  const auto p = defaults();
  const std::vector<VehicleState> fleet = {{0, 0, 0, 31}};
  const auto controls = controller::evaluate_fleet(fleet, p);
  auto e = energy_report(fleet, controls, p);
  Monitor m(p, 98, e.H);
  CHECK(m.observe(0.0, 0, e.H, e, fleet, controls));
  const double prev = e.H;
  e.H += 1e-3;
  CHECK_FALSE(m.observe(0.25, 1, prev, e, fleet, controls));
  const auto& v = m.verdict();
  CHECK_FALSE(v.h_nonincreasing);
  CHECK(v.worst_step_increase == doctest::Approx(1e-3));
  CHECK(v.worst_step_increase_t == 0.25);
  REQUIRE(v.first_failure_t.has_value());
  CHECK(*v.first_failure_t == 0.25);
  CHECK_FALSE(v.passed());
}

TEST_CASE("one-shot monitor step") {
  const auto p = defaults();
  const std::vector<VehicleState> fleet = {{0, 0, 0, 30}};
  const auto prev = energy_H(fleet, p);
  CHECK(monitor_step(prev, fleet, p, prev.H, 98, 0.0).passed());
  const std::vector<VehicleState> fast = {{0, 0, 0, 31}};
  const auto v = monitor_step(prev, fast, p, prev.H, 98, 1.0);
  CHECK_FALSE(v.h_nonincreasing);
}
