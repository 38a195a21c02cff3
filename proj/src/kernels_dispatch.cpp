#include <cstdlib>
#include <cstring>

#include "qmarg/kernels.hpp"

namespace qmarg::kernels {

namespace {

Backend pick() {
  const char* force = std::getenv("QMARG_SIMD");
  const bool want_scalar = force && std::strcmp(force, "scalar") == 0;
#if defined(__x86_64__) || defined(_M_X64)
  if (!want_scalar && __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return {avx2::conj_dot, avx2::sum_abs2, "avx2"};
#elif defined(__aarch64__)
  if (!want_scalar) return {neon::conj_dot, neon::sum_abs2, "neon"};
#endif
  (void)want_scalar;
  return {scalar::conj_dot, scalar::sum_abs2, "scalar"};
}

}  // namespace

const Backend& active() {
  static const Backend backend = pick();
  return backend;
}

}  // namespace qmarg::kernels
