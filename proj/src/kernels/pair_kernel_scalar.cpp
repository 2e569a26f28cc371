#include <cmath>

#include "lanefree/kernels/pair_kernel.hpp"
#include "lanefree/potentials.hpp"

namespace lanefree::kernels {

void pair_row_scalar(double xi, double yi, std::span<const double> xs,
                     std::span<const double> ys, const PairParams& params, PairRowOut out) {
  const std::size_t n = xs.size();
  for (std::size_t j = 0; j < n; ++j) {
    const double dx = xi - xs[j];
    const double dy = yi - ys[j];
    const double d = std::sqrt(dx * dx + params.p * (dy * dy));
    out.dist[j] = d;
    if (d > params.L && d <= params.lambda) {
      const auto vs = potentials::detail::vehicle_potential_core(d, params.q, params.L,
                                                                 params.lambda);
      const double g = vs.slope / d;
      out.pot[j] = vs.value;
      out.fx[j] = g * dx;
      out.fy[j] = g * dy;
    } else {
      out.pot[j] = 0.0;
      out.fx[j] = 0.0;
      out.fy[j] = 0.0;
    }
  }
}

}  // namespace lanefree::kernels
