#include "lanefree/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace lanefree::potentials {

namespace {

constexpr double kRelTol = 1e-12;
constexpr int kMaxBisections = 400;

double abs_slope(double d, const VehiclePotentialParams& params) {
  return std::abs(vehicle_potential(d, params).slope);
}

}  // namespace

void VehiclePotentialParams::validate() const {
  if (!(q > 0.0)) throw std::domain_error("potential scale q must be positive");
  if (!(L > 0.0)) throw std::domain_error("safety distance L must be positive");
  if (!(lambda > L)) throw std::domain_error("sensing radius lambda must exceed L");
}

void BoundaryPotentialParams::validate() const {
  if (!(a > 0.0)) throw std::domain_error("road half-width a must be positive");
  if (!(c >= 1.0)) throw std::domain_error("flat-strip parameter c must be >= 1");
}

double BoundaryPotentialParams::flat_half_width() const {
  return a * std::sqrt(c - 1.0) / std::sqrt(c);
}

ValueSlope vehicle_potential(double d, const VehiclePotentialParams& params) {
  if (!(d > params.L)) {
    throw std::domain_error("vehicle potential evaluated at d = " + std::to_string(d) +
                            " <= L = " + std::to_string(params.L));
  }
  if (d > params.lambda) return {0.0, 0.0};
  return detail::vehicle_potential_core(d, params.q, params.L, params.lambda);
}

ValueSlope boundary_potential(double y, const BoundaryPotentialParams& params) {
  const double a2 = params.a * params.a;
  if (!(std::abs(y) < params.a)) {
    throw std::domain_error("boundary potential evaluated off-road at y = " + std::to_string(y));
  }
  const double gap = a2 - y * y;
  const double g = 1.0 / gap - params.c / a2;
  if (g <= 0.0) return {0.0, 0.0};
  const double g3 = g * g * g;
  return {g3 * g, 4.0 * g3 * (2.0 * y) / (gap * gap)};
}

ValueSlope gain_shaping(double x, const GainShaping& shaping) {
  const double eps = shaping.eps;
  if (x <= -eps) return {0.0, 0.0};
  if (x < 0.0) {
    const double s = x + eps;
    return {s * s / (2.0 * eps), s / eps};
  }
  return {0.5 * eps + x, 1.0};
}

double bound_b1(double s, const VehiclePotentialParams& params) {
  if (!(s > params.L)) throw std::domain_error("b1 requires s > L");
  if (s >= params.lambda) return 0.0;

  constexpr int kSamples = 2048;
  const double span = params.lambda - s;
  int best_index = 0;
  double best = abs_slope(s, params);
  for (int k = 1; k < kSamples; ++k) {
    const double d = s + span * k / (kSamples - 1);
    const double v = abs_slope(d, params);
    if (v > best) {
      best = v;
      best_index = k;
    }
  }

  // Golden-section on the bracket around the best sample.
  double lo = s + span * std::max(0, best_index - 1) / (kSamples - 1);
  double hi = s + span * std::min(kSamples - 1, best_index + 1) / (kSamples - 1);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = abs_slope(c, params);
  double fd = abs_slope(d, params);
  for (int it = 0; it < 100 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = abs_slope(c, params);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = abs_slope(d, params);
    }
  }
  return std::max({best, fc, fd});
}

double bound_b2(double s, const BoundaryPotentialParams& params) {
  if (!(s >= 0.0) || !(s < params.a)) throw std::domain_error("b2 requires 0 <= s < a");
  return std::abs(boundary_potential(s, params).slope);
}

double barrier_omega(double s, double A, double phi) {
  const double cphi = std::cos(phi);
  const double arg = cphi + A * (1.0 - cphi) / (A + (1.0 - cphi) * s);
  return std::acos(std::min(1.0, arg));
}

double barrier_rho(double s, const VehiclePotentialParams& params) {
  if (!(s > 0.0)) return params.lambda;
  // Bisect on the offset e = d - L so resolution stays relative near L.
  double lo = 0.0;                       // V -> +inf
  double hi = params.lambda - params.L;  // V = 0 < s
  auto value_at = [&](double e) {
    return detail::vehicle_potential_core(params.L + e, params.q, params.L, params.lambda).value;
  };
  const double tol = kRelTol * std::max(1.0, s);
  for (int it = 0; it < kMaxBisections; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double v = value_at(mid);
    if (v >= s) {
      lo = mid;
      if (v - s <= tol) break;
    } else {
      hi = mid;
    }
  }
  // lo has V >= s, so d = L + lo is a lower bound on any d with V(d) <= s.
  if (lo <= 0.0) lo = std::numeric_limits<double>::min();
  return params.L + lo;
}

double barrier_kappa(double s, const BoundaryPotentialParams& params) {
  const double flat = params.flat_half_width();
  if (!(s > 0.0)) return flat;
  double lo = flat;      // U = 0 < s
  double hi = params.a;  // U -> +inf
  const double tol = kRelTol * std::max(1.0, s);
  for (int it = 0; it < kMaxBisections; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double u = boundary_potential(mid, params).value;
    if (u >= s) {
      hi = mid;
      if (u - s <= tol) break;
    } else {
      lo = mid;
    }
  }
  return hi < params.a ? hi : std::nextafter(params.a, 0.0);
}

}  // namespace lanefree::potentials
