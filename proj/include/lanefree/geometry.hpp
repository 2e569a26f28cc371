#pragma once

// Elliptical metric and the collision geometry of two equal-length vehicles
// whose orientations are bounded by phi.

namespace lanefree {

struct Point2 {
  double x = 0.0;  // longitudinal (m)
  double y = 0.0;  // lateral (m)
};

namespace geometry {

/// sqrt(dx^2 + p*dy^2). A metric for every fixed p > 0.
double elliptic_distance(Point2 a, Point2 b, double p);

/// Largest elliptic distance at which two vehicles of length `sigma`, with
/// orientations in [-phi, phi], can still overlap:
///   sigma * max(2 sqrt(p) sin(phi), sqrt(1 + (p-1) sin^2(phi))).
/// Throws std::domain_error unless sigma > 0, phi in (0, pi/2), p >= 1.
double safety_distance(double sigma, double phi, double p);

/// Weight p >= 1 that minimizes safety_distance / sqrt(p) (the semi-minor
/// axis of the safety ellipse). 1/(3 tan^2 phi) for phi <= pi/6, else 1.
double optimal_eccentricity(double phi);

/// Number of vehicles that fit side by side: 2 a sqrt(p) / L.
double lateral_capacity(double half_width, double p, double L);

/// Closed-segment intersection, including endpoint touching and collinear
/// overlap. Coordinates are snapped to a 1e-9 m grid and tested with exact
/// integer orientation predicates. |coordinate| must be <= 1e9 m.
bool segments_intersect(Point2 a1, Point2 a2, Point2 b1, Point2 b2);

/// Brute-force maximum of sigma*sqrt(f(eta1, eta2; theta1, theta2)) over a
/// `grid` x `grid` lattice of orientations in [-phi, phi] (endpoints included)
/// and eta corners {0,1}^2, where f is the squared elliptic distance between
/// points at fractions eta1, eta2 along the two vehicle segments.
/// Independent of safety_distance; used to validate it.
double max_collision_distance_bruteforce(double sigma, double phi, double p, int grid);

/// Conservative upper bound on how many vehicles can sit in the annulus
/// L <= d <= lambda around one vehicle with pairwise distance >= L:
/// area of the annulus dilated by L/2 over the area of an L/2 exclusion
/// ellipse, i.e. ceil(4 lambda (lambda + L) / L^2). Never below 2.
int estimate_m(double L, double lambda, double p);

/// sigma, phi, p with the derived safety distance L and the sensing radius.
struct SafetyGeometry {
  double sigma;
  double phi;
  double p;
  double L;
  double lambda;

  /// Computes L from (sigma, phi, p); throws std::domain_error if lambda <= L.
  static SafetyGeometry make(double sigma, double phi, double p, double lambda);
};

}  // namespace geometry
}  // namespace lanefree
