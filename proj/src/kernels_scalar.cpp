#include "qmarg/kernels.hpp"

namespace qmarg::kernels::scalar {

cx conj_dot(const cx* p, const cx* q, std::size_t n) noexcept {
  // Accumulate real and imaginary parts separately; avoids the NaN-guarded
  // library complex multiply in the hot loop.
  double re = 0.0, im = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double pr = p[k].real(), pi = p[k].imag();
    const double qr = q[k].real(), qi = q[k].imag();
    re += pr * qr + pi * qi;
    im += pi * qr - pr * qi;
  }
  return {re, im};
}

double sum_abs2(const cx* p, std::size_t n) noexcept {
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double pr = p[k].real(), pi = p[k].imag();
    acc += pr * pr + pi * pi;
  }
  return acc;
}

}  // namespace qmarg::kernels::scalar
