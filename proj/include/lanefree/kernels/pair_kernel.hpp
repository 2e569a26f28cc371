#pragma once

// Pairwise row kernel: for one vehicle at (xi, yi) and every vehicle j,
// the elliptic distance d_j, the potential V(d_j), and the repulsion terms
// V'(d_j) (xi - xj) / d_j and V'(d_j) (yi - yj) / d_j.
//
// Lanes with d <= L or d > lambda get V = fx = fy = 0; callers decide what a
// d <= L lane means. Every backend must produce bit-identical output to the
// scalar reference (no FMA, same operation order).

#include <cstddef>
#include <span>
#include <string_view>

namespace lanefree::kernels {

struct PairParams {
  double p;
  double L;
  double lambda;
  double q;
};

struct PairRowOut {
  std::span<double> dist;
  std::span<double> pot;
  std::span<double> fx;
  std::span<double> fy;
};

enum class Backend { scalar, avx2 };

std::string_view backend_name(Backend b);

/// Compiled in and supported by the running CPU.
bool backend_available(Backend b);

/// Backend used by pair_row(). Picked on first use: the widest available,
/// unless LANEFREE_SIMD=scalar|avx2 is set in the environment.
Backend active_backend();

/// Forces a backend; throws std::runtime_error if unavailable.
void set_backend(Backend b);

void pair_row_scalar(double xi, double yi, std::span<const double> xs,
                     std::span<const double> ys, const PairParams& params, PairRowOut out);

#if defined(LANEFREE_HAVE_AVX2)
void pair_row_avx2(double xi, double yi, std::span<const double> xs,
                   std::span<const double> ys, const PairParams& params, PairRowOut out);
#endif

/// Runs `b` directly, bypassing the active-backend selection.
void pair_row_with(Backend b, double xi, double yi, std::span<const double> xs,
                   std::span<const double> ys, const PairParams& params, PairRowOut out);

inline void pair_row(double xi, double yi, std::span<const double> xs,
                     std::span<const double> ys, const PairParams& params, PairRowOut out) {
  pair_row_with(active_backend(), xi, yi, xs, ys, params, out);
}

}  // namespace lanefree::kernels
