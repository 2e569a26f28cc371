#pragma once

// Repulsive potentials between vehicles (V) and from the road boundary (U),
// the gain-shaping function f, and the bound/inverse functions built from them.

namespace lanefree::potentials {

/// V(d) = q (lambda - d)^3 / (d - L) on (L, lambda], zero beyond lambda.
struct VehiclePotentialParams {
  double q = 3e-3;
  double L = 5.59;
  double lambda = 25.0;

  void validate() const;
};

/// U(y) = (1/(a^2 - y^2) - c/a^2)^4 outside the flat strip |y| <= y_flat,
/// zero inside it.
struct BoundaryPotentialParams {
  double a = 7.2;
  double c = 1.5;

  void validate() const;
  /// a sqrt(c-1) / sqrt(c)
  double flat_half_width() const;
};

/// C^1 function with f(x) >= max(x, 0): zero, then a parabola on (-eps, 0),
/// then eps/2 + x.
struct GainShaping {
  double eps = 0.2;
};

struct ValueSlope {
  double value = 0.0;
  double slope = 0.0;
};

namespace detail {

// Raw formula shared with the pair kernels. Caller guarantees L < d <= lambda.
// The operation order is mirrored bit-for-bit by the SIMD kernels.
inline ValueSlope vehicle_potential_core(double d, double q, double L, double lambda) {
  const double e = d - L;
  const double r = lambda - d;
  const double r2 = r * r;
  const double value = q * (r2 * r) / e;
  const double slope = q * ((-3.0 * r2) * e - r2 * r) / (e * e);
  return {value, slope};
}

}  // namespace detail

/// Throws std::domain_error for d <= L.
ValueSlope vehicle_potential(double d, const VehiclePotentialParams& params);

/// Throws std::domain_error for |y| >= a.
ValueSlope boundary_potential(double y, const BoundaryPotentialParams& params);

ValueSlope gain_shaping(double x, const GainShaping& shaping);

/// max |V'(d)| over [s, lambda]: 2048-point scan plus golden-section refinement
/// around the best sample. Zero at s = lambda. Requires L < s.
double bound_b1(double s, const VehiclePotentialParams& params);

/// max |U'(y)| over |y| <= s. |U'| grows outward from the flat strip, so this
/// is |U'(s)| (zero inside the strip). Requires 0 <= s < a.
double bound_b2(double s, const BoundaryPotentialParams& params);

/// Orientation bound implied by energy s:
///   arccos(cos(phi) + A(1 - cos(phi)) / (A + (1 - cos(phi)) s)), in [0, phi).
double barrier_omega(double s, double A, double phi);

/// Separation bound implied by energy s: the d in (L, lambda] with V(d) = s
/// (lambda when s = 0). Bisection; returns the side of the bracket with
/// V >= s so the bound stays conservative.
double barrier_rho(double s, const VehiclePotentialParams& params);

/// Lateral bound implied by energy s: the y in [y_flat, a) with U(y) = s
/// (y_flat when s = 0). Returns the side of the bracket with U >= s.
double barrier_kappa(double s, const BoundaryPotentialParams& params);

}  // namespace lanefree::potentials
