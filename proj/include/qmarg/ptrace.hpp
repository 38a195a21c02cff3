#pragma once

// Partial trace over arbitrary party subsets. The primary implementation is
// the expression method: each diagonal entry of the reduced matrix is an
// ordered list of contributing global amplitudes (suffix-ascending), and
// every off-diagonal entry falls out of pairing two such lists term by term.
// A conventional index-pair partial trace over dense density matrices is
// kept alongside as an independent cross-check.

#include <span>
#include <vector>

#include "qmarg/states.hpp"
#include "qmarg/types.hpp"

namespace qmarg {

/// The ordered amplitude list behind one diagonal entry of a reduced matrix:
/// terms[k] is the global amplitude at suffixes[k], suffixes ascending, and
/// suffixes[0] is the least suffix for the entry's bit pattern.
struct DiagonalExpression {
  basis_t rdm_index = 0;          // which diagonal entry this expression feeds
  std::vector<cx> terms;          // 2^{n-m} amplitudes
  std::vector<basis_t> suffixes;  // matching global indices
};

/// One expression per reduced-basis index, in index order.
std::vector<DiagonalExpression> diagonal_expressions(
    const PureState& psi, std::span<const party_t> parties);

/// Reduced density matrix of a pure state on a sorted party subset.
/// Diagonals are sums of |terms|^2; entry (i,j) for i < j pairs the k-th
/// term of expression i with the conjugated k-th term of expression j.
Rdm rdm_from_pure(const PureState& psi, std::span<const party_t> parties);

/// Conventional partial trace of a dense density matrix: scans all global
/// index pairs that agree outside the kept subset. Slower, but independent
/// of the expression machinery.
Rdm rdm_from_density(const DensityMatrix& rho,
                     std::span<const party_t> parties);

/// Maximum absolute entrywise difference between two reduced matrices on the
/// same subset of the same ambient system.
double marginal_residual(const Rdm& a, const Rdm& b);

}  // namespace qmarg
