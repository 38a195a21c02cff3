#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include "qmarg/kernels.hpp"

// Compiled with -mavx2 -mfma; callers reach this file only after the runtime
// CPU check in kernels_dispatch.cpp.

namespace qmarg::kernels::avx2 {

namespace {

inline double hsum(__m256d v) noexcept {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

}  // namespace

cx conj_dot(const cx* p, const cx* q, std::size_t n) noexcept {
  // Lane layout: [re0, im0, re1, im1]. For acc_re, elementwise p*q gives
  // [pr*qr, pi*qi, ...] whose full horizontal sum is the real part. For the
  // imaginary part, multiply by the re/im-swapped q and use addsub so even
  // lanes subtract pr*qi while odd lanes add pi*qr.
  __m256d re0 = _mm256_setzero_pd(), re1 = _mm256_setzero_pd();
  __m256d im0 = _mm256_setzero_pd(), im1 = _mm256_setzero_pd();
  const double* a = reinterpret_cast<const double*>(p);
  const double* b = reinterpret_cast<const double*>(q);
  std::size_t k = 0;
  const std::size_t n4 = n / 4 * 4;  // 4 complex per unrolled step
  for (; k < n4; k += 4) {
    __m256d x0 = _mm256_loadu_pd(a + 2 * k);
    __m256d y0 = _mm256_loadu_pd(b + 2 * k);
    __m256d x1 = _mm256_loadu_pd(a + 2 * k + 4);
    __m256d y1 = _mm256_loadu_pd(b + 2 * k + 4);
    re0 = _mm256_fmadd_pd(x0, y0, re0);
    re1 = _mm256_fmadd_pd(x1, y1, re1);
    im0 = _mm256_addsub_pd(im0, _mm256_mul_pd(x0, _mm256_permute_pd(y0, 0x5)));
    im1 = _mm256_addsub_pd(im1, _mm256_mul_pd(x1, _mm256_permute_pd(y1, 0x5)));
  }
  if (k + 2 <= n) {
    __m256d x = _mm256_loadu_pd(a + 2 * k);
    __m256d y = _mm256_loadu_pd(b + 2 * k);
    re0 = _mm256_fmadd_pd(x, y, re0);
    im0 = _mm256_addsub_pd(im0, _mm256_mul_pd(x, _mm256_permute_pd(y, 0x5)));
    k += 2;
  }
  double re = hsum(_mm256_add_pd(re0, re1));
  double im = hsum(_mm256_add_pd(im0, im1));
  for (; k < n; ++k) {
    const double pr = p[k].real(), pi = p[k].imag();
    const double qr = q[k].real(), qi = q[k].imag();
    re += pr * qr + pi * qi;
    im += pi * qr - pr * qi;
  }
  return {re, im};
}

double sum_abs2(const cx* p, std::size_t n) noexcept {
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  const double* a = reinterpret_cast<const double*>(p);
  std::size_t k = 0;
  const std::size_t n4 = n / 4 * 4;
  for (; k < n4; k += 4) {
    __m256d x0 = _mm256_loadu_pd(a + 2 * k);
    __m256d x1 = _mm256_loadu_pd(a + 2 * k + 4);
    acc0 = _mm256_fmadd_pd(x0, x0, acc0);
    acc1 = _mm256_fmadd_pd(x1, x1, acc1);
  }
  if (k + 2 <= n) {
    __m256d x = _mm256_loadu_pd(a + 2 * k);
    acc0 = _mm256_fmadd_pd(x, x, acc0);
    k += 2;
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) {
    const double pr = p[k].real(), pi = p[k].imag();
    acc += pr * pr + pi * pi;
  }
  return acc;
}

}  // namespace qmarg::kernels::avx2

#endif  // x86-64
