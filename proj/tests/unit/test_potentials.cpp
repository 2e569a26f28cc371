#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "lanefree/potentials.hpp"
#include "lanefree/rng.hpp"
#include "lanefree/verify.hpp"

using namespace lanefree;
using namespace lanefree::potentials;

namespace {

const VehiclePotentialParams kV{3e-3, 5.59, 25.0};
const BoundaryPotentialParams kU{7.2, 1.5};
const GainShaping kF{0.2};

}  // namespace

TEST_CASE("vehicle potential values") {
  const auto at15 = vehicle_potential(15.0, kV);
  CHECK(at15.value == doctest::Approx(0.3188097768331562).epsilon(1e-14));
  CHECK(at15.slope == doctest::Approx(-0.1295228243180825).epsilon(1e-14));
  const auto at_lambda = vehicle_potential(25.0, kV);
  CHECK(at_lambda.value == 0.0);
  CHECK(at_lambda.slope == 0.0);
  CHECK(vehicle_potential(40.0, kV).value == 0.0);
  CHECK(vehicle_potential(40.0, kV).slope == 0.0);
  CHECK_THROWS_AS(vehicle_potential(5.59, kV), std::domain_error);
  CHECK_THROWS_AS(vehicle_potential(1.0, kV), std::domain_error);
}

TEST_CASE("vehicle potential blows up monotonically near L") {
  double prev = 0.0;
  for (double delta = 1.0; delta >= 1e-9; delta /= 10.0) {
    const double v = vehicle_potential(kV.L + delta, kV).value;
    CHECK(v > prev);
    prev = v;
  }
  CHECK(prev > 1e9 * kV.q * std::pow(kV.lambda - kV.L, 3) * 0.999);
}

TEST_CASE("vehicle potential is nonnegative and decreasing on (L, lambda]") {
  SplitMix64 rng(1);
  for (int k = 0; k < 1000; ++k) {
    const double d = rng.uniform(kV.L + 1e-6, kV.lambda);
    const auto vs = vehicle_potential(d, kV);
    CHECK(vs.value >= 0.0);
    CHECK(vs.slope <= 0.0);
  }
}

TEST_CASE("vehicle potential joins zero smoothly at lambda") {
  // Value, slope and curvature all vanish at lambda.
  const double h = 1e-4;
  const auto below = vehicle_potential(kV.lambda - h, kV);
  CHECK(std::abs(below.slope) < 1e-8);
  const double curvature = (vehicle_potential(kV.lambda - h, kV).slope -
                            vehicle_potential(kV.lambda - 2 * h, kV).slope) / h;
  CHECK(std::abs(curvature) < 1e-4);
}

TEST_CASE("boundary potential values") {
  CHECK(kU.flat_half_width() == doctest::Approx(4.156921938165306).epsilon(1e-14));
  CHECK(boundary_potential(0.0, kU).value == 0.0);
  CHECK(boundary_potential(kU.flat_half_width(), kU).value == 0.0);
  CHECK(boundary_potential(-kU.flat_half_width(), kU).slope == 0.0);
  const auto at6 = boundary_potential(6.0, kU);
  CHECK(at6.value == doctest::Approx(1.367438280045502e-6).epsilon(1e-13));
  CHECK(at6.slope == doctest::Approx(7.650004363890921e-6).epsilon(1e-13));
  const auto atm6 = boundary_potential(-6.0, kU);
  CHECK(atm6.value == at6.value);
  CHECK(atm6.slope == -at6.slope);
  CHECK_THROWS_AS(boundary_potential(7.2, kU), std::domain_error);
  CHECK_THROWS_AS(boundary_potential(-8.0, kU), std::domain_error);
}

TEST_CASE("boundary force points outward outside the flat strip") {
  SplitMix64 rng(2);
  for (int k = 0; k < 1000; ++k) {
    const double y = rng.uniform(-7.19, 7.19);
    const auto u = boundary_potential(y, kU);
    CHECK(u.value >= 0.0);
    if (std::abs(y) > kU.flat_half_width()) {
      CHECK(u.slope * y > 0.0);
    } else {
      CHECK(u.slope == 0.0);
    }
  }
}

TEST_CASE("c = 1 makes the strip a single line") {
  const BoundaryPotentialParams one{7.2, 1.0};
  CHECK(one.flat_half_width() == 0.0);
  CHECK(boundary_potential(0.0, one).value == 0.0);
  CHECK(boundary_potential(0.1, one).value > 0.0);
}

TEST_CASE("gain shaping") {
  auto f = [](double x) { return gain_shaping(x, kF); };
  CHECK(f(-0.2).value == 0.0);
  CHECK(f(-0.2).slope == 0.0);
  CHECK(f(0.0).value == doctest::Approx(0.1));
  CHECK(f(0.0).slope == doctest::Approx(1.0));
  CHECK(f(1.0).value == doctest::Approx(1.1).epsilon(1e-15));
  CHECK(f(1.0).slope == 1.0);
  // C^1 at both joins.
  for (double x0 : {-0.2, 0.0}) {
    const double h = 1e-9;
    CHECK(std::abs(f(x0 - h).value - f(x0 + h).value) < 1e-8);
    CHECK(std::abs(f(x0 - h).slope - f(x0 + h).slope) < 1e-7);
  }
  SplitMix64 rng(4);
  for (int k = 0; k < 1000; ++k) {
    const double x = rng.uniform(-5, 5);
    CHECK(f(x).value >= std::max(x, 0.0));
  }
}

TEST_CASE("analytic derivatives match finite differences") {
  CHECK(verify::check_vehicle_gradient(kV, 1000, 21).worst_rel < 1e-6);
  CHECK(verify::check_boundary_gradient(kU, 1000, 22).worst_rel < 1e-6);
  CHECK(verify::check_shaping_gradient(kF, 1000, 23).worst_rel < 1e-6);
}

TEST_CASE("b1: maximum repulsion slope beyond s") {
  CHECK(bound_b1(kV.lambda, kV) == 0.0);
  CHECK_THROWS_AS(bound_b1(kV.L, kV), std::domain_error);
  // Dense-grid reference on [15, lambda].
  double ref = 0.0;
  const int n = 1000000;
  for (int k = 0; k <= n; ++k) {
    const double d = 15.0 + (kV.lambda - 15.0) * k / n;
    ref = std::max(ref, std::abs(vehicle_potential(d, kV).slope));
  }
  CHECK(bound_b1(15.0, kV) >= ref * (1.0 - 1e-12));
  CHECK(bound_b1(15.0, kV) <= ref * (1.0 + 1e-9));
  double prev = bound_b1(kV.L + 1e-3, kV);
  for (double s = kV.L + 0.01; s <= kV.lambda; s += 0.37) {
    const double b = bound_b1(s, kV);
    CHECK(b <= prev);
    prev = b;
  }
}

TEST_CASE("b2: maximum boundary slope within s") {
  CHECK(bound_b2(0.0, kU) == 0.0);
  CHECK(bound_b2(kU.flat_half_width(), kU) == 0.0);
  CHECK(bound_b2(6.0, kU) == doctest::Approx(7.650004363890921e-6).epsilon(1e-13));
  double ref = 0.0;
  for (int k = 0; k <= 100000; ++k) {
    ref = std::max(ref, std::abs(boundary_potential(-6.0 + 12.0 * k / 100000, kU).slope));
  }
  CHECK(bound_b2(6.0, kU) == doctest::Approx(ref).epsilon(1e-12));
  CHECK(bound_b2(7.19999, kU) > 1e10);
  CHECK_THROWS_AS(bound_b2(7.2, kU), std::domain_error);
  double prev = 0.0;
  for (double s = 0.0; s < 7.19; s += 0.05) {
    CHECK(bound_b2(s, kU) >= prev);
    prev = bound_b2(s, kU);
  }
}

TEST_CASE("omega: orientation bound from energy") {
  CHECK(barrier_omega(0.0, 1.0, 0.25) == 0.0);
  CHECK(barrier_omega(1.0, 1.0, 0.25) == doctest::Approx(0.04330001434229799).epsilon(1e-12));
  CHECK(barrier_omega(1e12, 1.0, 0.25) < 0.25);
  CHECK(barrier_omega(1e12, 1.0, 0.25) > 0.2499);
  double prev = 0.0;
  for (double s = 1e-6; s < 1e6; s *= 1.7) {
    const double w = barrier_omega(s, 1.0, 0.25);
    CHECK(w >= prev);
    prev = w;
  }
}

TEST_CASE("rho and kappa invert the potentials") {
  CHECK(barrier_rho(0.0, kV) == kV.lambda);
  CHECK(barrier_kappa(0.0, kU) == kU.flat_half_width());
  double prev_rho = kV.lambda;
  double prev_kappa = kU.flat_half_width();
  for (double s = 1e-8; s < 1e6; s *= 3.1) {
    CAPTURE(s);
    const double rho = barrier_rho(s, kV);
    const double kappa = barrier_kappa(s, kU);
    CHECK(rho > kV.L);
    CHECK(rho <= kV.lambda);
    CHECK(rho <= prev_rho);
    CHECK(vehicle_potential(rho, kV).value >= s);  // conservative side
    CHECK(kappa >= kU.flat_half_width());
    CHECK(kappa < kU.a);
    CHECK(kappa >= prev_kappa);
    CHECK(boundary_potential(kappa, kU).value >= s);
    prev_rho = rho;
    prev_kappa = kappa;
  }
  const double r = barrier_rho(0.3188097768331562, kV);
  CHECK(r == doctest::Approx(15.0).epsilon(1e-12));
}
