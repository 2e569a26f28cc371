#include "lanefree/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace lanefree::geometry {

namespace {

void require_phi(double phi) {
  if (!(phi > 0.0 && phi < std::numbers::pi / 2.0)) {
    throw std::domain_error("orientation bound phi must lie in (0, pi/2), got " +
                            std::to_string(phi));
  }
}

void require_weight(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw std::domain_error("eccentricity weight p must be >= 1, got " + std::to_string(p));
  }
}

// Squared elliptic distance between the points at fractions e1, e2 along two
// unit-length segments leaving the origin with angles t1, t2.
double segment_gap_sq(double t1, double t2, double e1, double e2, double p) {
  const double dx = e1 * std::cos(t1) - e2 * std::cos(t2);
  const double dy = e1 * std::sin(t1) - e2 * std::sin(t2);
  return dx * dx + p * dy * dy;
}

using Fixed = std::int64_t;
using Wide = __int128;

constexpr double kQuantum = 1e-9;
constexpr double kMaxCoordinate = 1e9;

struct FixedPoint {
  Fixed x;
  Fixed y;
};

Fixed quantize(double v) {
  if (!(std::abs(v) <= kMaxCoordinate)) {
    throw std::out_of_range("segment coordinate outside the +-1e9 m exact-predicate range");
  }
  return static_cast<Fixed>(std::llround(v / kQuantum));
}

FixedPoint quantize(Point2 p) { return {quantize(p.x), quantize(p.y)}; }

int orientation(FixedPoint a, FixedPoint b, FixedPoint c) {
  const Wide abx = static_cast<Wide>(b.x) - a.x;
  const Wide aby = static_cast<Wide>(b.y) - a.y;
  const Wide acx = static_cast<Wide>(c.x) - a.x;
  const Wide acy = static_cast<Wide>(c.y) - a.y;
  const Wide cross = abx * acy - aby * acx;
  return (cross > 0) - (cross < 0);
}

// c is known collinear with a-b; is it inside the bounding box of a-b?
bool on_segment(FixedPoint a, FixedPoint b, FixedPoint c) {
  return std::min(a.x, b.x) <= c.x && c.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= c.y && c.y <= std::max(a.y, b.y);
}

}  // namespace

double elliptic_distance(Point2 a, Point2 b, double p) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + p * (dy * dy));
}

double safety_distance(double sigma, double phi, double p) {
  if (!(sigma > 0.0)) throw std::domain_error("vehicle length sigma must be positive");
  require_phi(phi);
  require_weight(p);
  const double s = std::sin(phi);
  const double crossing = 2.0 * std::sqrt(p) * s;
  const double parallel = std::sqrt(1.0 + (p - 1.0) * s * s);
  return sigma * std::max(crossing, parallel);
}

double optimal_eccentricity(double phi) {
  require_phi(phi);
  if (phi > std::numbers::pi / 6.0) return 1.0;
  const double t = std::tan(phi);
  return std::max(1.0, 1.0 / (3.0 * t * t));
}

double lateral_capacity(double half_width, double p, double L) {
  return 2.0 * half_width * std::sqrt(p) / L;
}

bool segments_intersect(Point2 a1, Point2 a2, Point2 b1, Point2 b2) {
  const FixedPoint p1 = quantize(a1), p2 = quantize(a2);
  const FixedPoint q1 = quantize(b1), q2 = quantize(b2);

  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);

  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

double max_collision_distance_bruteforce(double sigma, double phi, double p, int grid) {
  if (grid < 2) throw std::domain_error("grid must have at least 2 points per axis");
  require_phi(phi);
  require_weight(p);
  double best = 0.0;
  for (int a = 0; a < grid; ++a) {
    const double t1 = -phi + 2.0 * phi * a / (grid - 1);
    for (int b = 0; b < grid; ++b) {
      const double t2 = -phi + 2.0 * phi * b / (grid - 1);
      // f(0,0) = 0; the remaining corners bound the convex f on [0,1]^2.
      best = std::max({best, segment_gap_sq(t1, t2, 1.0, 1.0, p),
                       segment_gap_sq(t1, t2, 1.0, 0.0, p),
                       segment_gap_sq(t1, t2, 0.0, 1.0, p)});
    }
  }
  return sigma * std::sqrt(best);
}

int estimate_m(double L, double lambda, double p) {
  if (!(L > 0.0) || !(lambda > L)) {
    throw std::domain_error("estimate_m requires lambda > L > 0");
  }
  require_weight(p);
  // Scaling y by sqrt(p) turns the ellipses into circles; both areas pick up
  // the same factor, so p drops out of the ratio.
  const double outer = lambda + 0.5 * L;
  const double inner = 0.5 * L;
  const double exclusion = 0.5 * L;
  const double ratio = (outer * outer - inner * inner) / (exclusion * exclusion);
  return std::max(2, static_cast<int>(std::ceil(ratio)));
}

SafetyGeometry SafetyGeometry::make(double sigma, double phi, double p, double lambda) {
  const double L = safety_distance(sigma, phi, p);
  if (!(lambda > L)) throw std::domain_error("sensing radius lambda must exceed L");
  return {sigma, phi, p, L, lambda};
}

}  // namespace lanefree::geometry
