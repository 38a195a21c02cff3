#pragma once

// Domain value types (pure states, density matrices, W coefficients, reduced
// density matrices) plus the closed-form W-state constructions. The factory
// functions validate invariants against a Tolerances record; analytic
// builders construct trusted values directly via aggregate initialization.

#include <vector>

#include "qmarg/types.hpp"

namespace qmarg {

/// Dense amplitude vectors are capped at 2^20 entries (~16 MiB each).
inline constexpr int kDenseVectorCap = 20;
/// Dense 2^n x 2^n matrices are capped at n = 12 (4096^2 entries, ~256 MiB).
inline constexpr int kDenseMatrixCap = 12;

struct PureState {
  int n = 0;        // qubit count
  cvec amplitudes;  // length 2^n, big-endian basis order
};

struct DensityMatrix {
  int n = 0;
  cmat entries;  // 2^n x 2^n, Hermitian, trace 1, PSD
};

/// Coefficients of a W-class state indexed per party: c[J-1] multiplies the
/// basis string whose single 1 sits at party J (global index 2^{n-J}).
struct WCoefficients {
  int n = 0;
  cvec c;  // length n, sum of |c_J|^2 = 1
};

/// Reduced density matrix on a sorted party subset of an n-party system.
struct Rdm {
  std::vector<party_t> parties;  // strictly increasing, size m
  int ambient_n = 0;
  cmat entries;  // 2^m x 2^m
};

/// Validation helpers; throw std::invalid_argument on violated invariants
/// and CapExceeded on dense-cap violations.
void validate_pure_state(const PureState& psi, const Tolerances& tol = {});
void validate_density_matrix(const DensityMatrix& rho,
                             const Tolerances& tol = {});
void validate_w_coefficients(const WCoefficients& c,
                             const Tolerances& tol = {});
void validate_rdm(const Rdm& rdm, const Tolerances& tol = {});

PureState make_pure_state(int n, cvec amplitudes, const Tolerances& tol = {});
DensityMatrix make_density_matrix(int n, cmat entries,
                                  const Tolerances& tol = {});
/// Party count is the coefficient count; requires n >= 2.
WCoefficients make_w_coefficients(cvec c, const Tolerances& tol = {});
Rdm make_rdm(std::vector<party_t> parties, int ambient_n, cmat entries,
             const Tolerances& tol = {});

/// |W> with amplitude c_J at single_one_index(J, n), zero elsewhere.
PureState make_w(const WCoefficients& c);

/// The projector |W><W| as a dense matrix (n capped at kDenseMatrixCap).
DensityMatrix w_density(const WCoefficients& c);

/// Closed-form two-party marginal of |W><W| on parties J < K, in O(1)
/// without building the global state (no cap on n):
///   diag(1 - |c_J|^2 - |c_K|^2, |c_K|^2, |c_J|^2, 0),
///   entry(1,2) = c_K * conj(c_J),
/// rows ordered |00>, |01>, |10>, |11>.
Rdm w_bipartite_marginal(const WCoefficients& c, party_t J, party_t K);

/// The bipartite marginal split into an unnormalized entangled vector and the
/// weight left on |00><00|:
///   vec = (0, c_K, c_J, 0),  residual_weight = 1 - |c_J|^2 - |c_K|^2,
/// so vec * vec^dag + residual_weight * |00><00| reassembles the marginal.
struct PsiPlusDecomposition {
  Eigen::Vector4cd vec;
  double residual_weight = 0.0;
};
PsiPlusDecomposition psi_plus_decomposition(const WCoefficients& c, party_t J,
                                            party_t K);

/// <b|a> = sum_i a_i * conj(b_i), evaluated with the active SIMD backend.
cx overlap(const PureState& a, const PureState& b);

}  // namespace qmarg
