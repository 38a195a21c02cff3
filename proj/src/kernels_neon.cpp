#if defined(__aarch64__)

#include <arm_neon.h>

#include "qmarg/kernels.hpp"

namespace qmarg::kernels::neon {

cx conj_dot(const cx* p, const cx* q, std::size_t n) noexcept {
  // One complex per 128-bit vector, two vectors per step. The even lane of
  // im accumulates pr*qi, the odd lane pi*qr; they are subtracted at the end.
  float64x2_t re0 = vdupq_n_f64(0.0), re1 = vdupq_n_f64(0.0);
  float64x2_t im0 = vdupq_n_f64(0.0), im1 = vdupq_n_f64(0.0);
  const double* a = reinterpret_cast<const double*>(p);
  const double* b = reinterpret_cast<const double*>(q);
  std::size_t k = 0;
  const std::size_t n2 = n / 2 * 2;
  for (; k < n2; k += 2) {
    float64x2_t x0 = vld1q_f64(a + 2 * k);
    float64x2_t y0 = vld1q_f64(b + 2 * k);
    float64x2_t x1 = vld1q_f64(a + 2 * k + 2);
    float64x2_t y1 = vld1q_f64(b + 2 * k + 2);
    re0 = vfmaq_f64(re0, x0, y0);
    re1 = vfmaq_f64(re1, x1, y1);
    im0 = vfmaq_f64(im0, x0, vextq_f64(y0, y0, 1));
    im1 = vfmaq_f64(im1, x1, vextq_f64(y1, y1, 1));
  }
  float64x2_t re_v = vaddq_f64(re0, re1);
  float64x2_t im_v = vaddq_f64(im0, im1);
  double re = vaddvq_f64(re_v);
  double im = vgetq_lane_f64(im_v, 1) - vgetq_lane_f64(im_v, 0);
  for (; k < n; ++k) {
    const double pr = p[k].real(), pi = p[k].imag();
    const double qr = q[k].real(), qi = q[k].imag();
    re += pr * qr + pi * qi;
    im += pi * qr - pr * qi;
  }
  return {re, im};
}

double sum_abs2(const cx* p, std::size_t n) noexcept {
  float64x2_t acc0 = vdupq_n_f64(0.0), acc1 = vdupq_n_f64(0.0);
  const double* a = reinterpret_cast<const double*>(p);
  std::size_t k = 0;
  const std::size_t n2 = n / 2 * 2;
  for (; k < n2; k += 2) {
    float64x2_t x0 = vld1q_f64(a + 2 * k);
    float64x2_t x1 = vld1q_f64(a + 2 * k + 2);
    acc0 = vfmaq_f64(acc0, x0, x0);
    acc1 = vfmaq_f64(acc1, x1, x1);
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; k < n; ++k) {
    const double pr = p[k].real(), pi = p[k].imag();
    acc += pr * pr + pi * pi;
  }
  return acc;
}

}  // namespace qmarg::kernels::neon

#endif  // aarch64
