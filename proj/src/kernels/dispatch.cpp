#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "lanefree/kernels/pair_kernel.hpp"

namespace lanefree::kernels {

namespace {

Backend detect() {
  if (const char* env = std::getenv("LANEFREE_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return Backend::scalar;
    if (want == "avx2" && backend_available(Backend::avx2)) return Backend::avx2;
  }
  if (backend_available(Backend::avx2)) return Backend::avx2;
  return Backend::scalar;
}

std::atomic<int>& selected() {
  static std::atomic<int> value{static_cast<int>(detect())};
  return value;
}

}  // namespace

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
  }
  return "unknown";
}

bool backend_available(Backend b) {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(LANEFREE_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Backend active_backend() { return static_cast<Backend>(selected().load(std::memory_order_relaxed)); }

void set_backend(Backend b) {
  if (!backend_available(b)) {
    throw std::runtime_error("pair kernel backend '" + std::string(backend_name(b)) +
                             "' is not available on this machine");
  }
  selected().store(static_cast<int>(b), std::memory_order_relaxed);
}

void pair_row_with(Backend b, double xi, double yi, std::span<const double> xs,
                   std::span<const double> ys, const PairParams& params, PairRowOut out) {
  switch (b) {
#if defined(LANEFREE_HAVE_AVX2)
    case Backend::avx2:
      pair_row_avx2(xi, yi, xs, ys, params, out);
      return;
#endif
    default:
      pair_row_scalar(xi, yi, xs, ys, params, out);
      return;
  }
}

}  // namespace lanefree::kernels
