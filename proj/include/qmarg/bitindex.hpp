#pragma once

// Exact integer bookkeeping for computational-basis indices: binary/decimal
// conversions, least-suffix arithmetic, enumeration of the 2^{n-m} global
// indices behind each reduced-density-matrix entry, and the coverage graph
// of a set of party pairs. Everything here is pure and allocation-light.

#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "qmarg/types.hpp"

namespace qmarg {

/// Largest ambient qubit count for which basis_t arithmetic fits a machine word.
inline constexpr int kMaxAmbient = 62;

void check_ambient(int n);
void check_party(party_t j, int n);

/// Validates that `positions` is strictly increasing and within 1..n.
void check_positions(std::span<const party_t> positions, int n);

/// Bit weight of party j in an n-qubit register: 2^{n-j}.
basis_t party_weight(party_t j, int n);

/// Big-endian n-bit expansion of i (bit for party 1 first).
std::vector<int> to_bits(basis_t i, int n);

/// Inverse of to_bits.
basis_t from_bits(std::span<const int> bits);

/// Index of the basis string with a single 1 at party j: 2^{n-j}.
basis_t single_one_index(party_t j, int n);

/// sum_k bits[k] * 2^{n - positions[k]}: the smallest global index whose bits
/// at `positions` equal `bits`.
basis_t least_suffix(std::span<const party_t> positions,
                     std::span<const int> bits, int n);

/// All 2^{n-m} global indices whose bits at `positions` equal `bits`,
/// ascending. Element 0 equals least_suffix.
std::vector<basis_t> enumerate_suffixes(std::span<const party_t> positions,
                                        std::span<const int> bits, int n);

/// Bit mask with a 1 at each listed party weight.
basis_t position_mask(std::span<const party_t> positions, int n);

struct Coverage {
  bool connected = false;
  std::vector<std::vector<party_t>> components;  // sorted, singletons included
};

/// Graph on vertices 1..n with `pairs` as edges; reports connectivity and the
/// component partition.
Coverage coverage_graph_connected(const std::set<Pair>& pairs, int n);

}  // namespace qmarg
