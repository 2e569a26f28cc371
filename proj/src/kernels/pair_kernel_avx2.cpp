// Compiled with -mavx2 only. No FMA: results must match the scalar kernel bit for bit.
#include <immintrin.h>

#include "lanefree/kernels/pair_kernel.hpp"

namespace lanefree::kernels {

void pair_row_avx2(double xi, double yi, std::span<const double> xs,
                   std::span<const double> ys, const PairParams& params, PairRowOut out) {
  const std::size_t n = xs.size();
  const __m256d vxi = _mm256_set1_pd(xi);
  const __m256d vyi = _mm256_set1_pd(yi);
  const __m256d vp = _mm256_set1_pd(params.p);
  const __m256d vL = _mm256_set1_pd(params.L);
  const __m256d vlam = _mm256_set1_pd(params.lambda);
  const __m256d vq = _mm256_set1_pd(params.q);
  const __m256d vm3 = _mm256_set1_pd(-3.0);
  const __m256d zero = _mm256_setzero_pd();

  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d dx = _mm256_sub_pd(vxi, _mm256_loadu_pd(xs.data() + j));
    const __m256d dy = _mm256_sub_pd(vyi, _mm256_loadu_pd(ys.data() + j));
    const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dx, dx),
                                     _mm256_mul_pd(vp, _mm256_mul_pd(dy, dy)));
    const __m256d d = _mm256_sqrt_pd(d2);
    _mm256_storeu_pd(out.dist.data() + j, d);

    const __m256d active = _mm256_and_pd(_mm256_cmp_pd(d, vL, _CMP_GT_OQ),
                                         _mm256_cmp_pd(d, vlam, _CMP_LE_OQ));
    if (_mm256_movemask_pd(active) == 0) {
      _mm256_storeu_pd(out.pot.data() + j, zero);
      _mm256_storeu_pd(out.fx.data() + j, zero);
      _mm256_storeu_pd(out.fy.data() + j, zero);
      continue;
    }

    const __m256d e = _mm256_sub_pd(d, vL);
    const __m256d r = _mm256_sub_pd(vlam, d);
    const __m256d r2 = _mm256_mul_pd(r, r);
    const __m256d r3 = _mm256_mul_pd(r2, r);
    const __m256d value = _mm256_div_pd(_mm256_mul_pd(vq, r3), e);
    const __m256d num = _mm256_sub_pd(_mm256_mul_pd(_mm256_mul_pd(vm3, r2), e), r3);
    const __m256d slope = _mm256_div_pd(_mm256_mul_pd(vq, num), _mm256_mul_pd(e, e));
    const __m256d g = _mm256_div_pd(slope, d);

    _mm256_storeu_pd(out.pot.data() + j, _mm256_blendv_pd(zero, value, active));
    _mm256_storeu_pd(out.fx.data() + j, _mm256_blendv_pd(zero, _mm256_mul_pd(g, dx), active));
    _mm256_storeu_pd(out.fy.data() + j, _mm256_blendv_pd(zero, _mm256_mul_pd(g, dy), active));
  }

  if (j < n) {
    pair_row_scalar(xi, yi, xs.subspan(j), ys.subspan(j), params,
                    {out.dist.subspan(j), out.pot.subspan(j), out.fx.subspan(j),
                     out.fy.subspan(j)});
  }
}

}  // namespace lanefree::kernels
