#pragma once

// Data-parallel kernels for the amplitude-level inner loops: conjugated dot
// products between expression term lists and squared-norm accumulation.
// A scalar reference implementation always exists; on x86-64 an AVX2 variant
// and on aarch64 a NEON variant are selected at runtime. Set QMARG_SIMD=scalar
// in the environment to force the reference path.

#include <cstddef>
#include <span>

#include "qmarg/types.hpp"

namespace qmarg::kernels {

namespace scalar {
cx conj_dot(const cx* p, const cx* q, std::size_t n) noexcept;
double sum_abs2(const cx* p, std::size_t n) noexcept;
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
cx conj_dot(const cx* p, const cx* q, std::size_t n) noexcept;
double sum_abs2(const cx* p, std::size_t n) noexcept;
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
cx conj_dot(const cx* p, const cx* q, std::size_t n) noexcept;
double sum_abs2(const cx* p, std::size_t n) noexcept;
}  // namespace neon
#endif

struct Backend {
  cx (*conj_dot)(const cx*, const cx*, std::size_t) noexcept;
  double (*sum_abs2)(const cx*, std::size_t) noexcept;
  const char* name;
};

/// Backend picked once at first use from CPU features and QMARG_SIMD.
const Backend& active();

/// sum_k p_k * conj(q_k)
inline cx conj_dot(std::span<const cx> p, std::span<const cx> q) {
  if (p.size() != q.size())
    throw std::invalid_argument("conj_dot: length mismatch");
  return active().conj_dot(p.data(), q.data(), p.size());
}

/// sum_k |p_k|^2
inline double sum_abs2(std::span<const cx> p) noexcept {
  return active().sum_abs2(p.data(), p.size());
}

}  // namespace qmarg::kernels
