#include "qmarg/bitindex.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace qmarg {

void check_ambient(int n) {
  if (n < 1 || n > kMaxAmbient)
    throw std::invalid_argument("qubit count must be in 1.." +
                                std::to_string(kMaxAmbient) + ", got " +
                                std::to_string(n));
}

void check_party(party_t j, int n) {
  check_ambient(n);
  if (j < 1 || j > n)
    throw std::out_of_range("party label " + std::to_string(j) +
                            " outside 1.." + std::to_string(n));
}

void check_positions(std::span<const party_t> positions, int n) {
  check_ambient(n);
  party_t prev = 0;
  for (party_t p : positions) {
    if (p < 1 || p > n)
      throw std::out_of_range("party label " + std::to_string(p) +
                              " outside 1.." + std::to_string(n));
    if (p <= prev)
      throw std::invalid_argument("positions must be strictly increasing");
    prev = p;
  }
}

basis_t party_weight(party_t j, int n) {
  check_party(j, n);
  return basis_t{1} << (n - j);
}

std::vector<int> to_bits(basis_t i, int n) {
  check_ambient(n);
  if ((i >> n) != 0)
    throw std::out_of_range("basis index " + std::to_string(i) +
                            " does not fit " + std::to_string(n) + " bits");
  std::vector<int> bits(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    bits[static_cast<std::size_t>(k)] = static_cast<int>((i >> (n - 1 - k)) & 1u);
  return bits;
}

basis_t from_bits(std::span<const int> bits) {
  const int n = static_cast<int>(bits.size());
  check_ambient(n);
  basis_t i = 0;
  for (int k = 0; k < n; ++k) {
    const int b = bits[static_cast<std::size_t>(k)];
    if (b != 0 && b != 1) throw std::invalid_argument("bits must be 0 or 1");
    i = (i << 1) | static_cast<basis_t>(b);
  }
  return i;
}

basis_t single_one_index(party_t j, int n) { return party_weight(j, n); }

basis_t least_suffix(std::span<const party_t> positions,
                     std::span<const int> bits, int n) {
  check_positions(positions, n);
  if (positions.size() != bits.size())
    throw std::invalid_argument("positions/bits length mismatch");
  basis_t s = 0;
  for (std::size_t k = 0; k < positions.size(); ++k) {
    const int b = bits[k];
    if (b != 0 && b != 1) throw std::invalid_argument("bits must be 0 or 1");
    if (b) s |= party_weight(positions[k], n);
  }
  return s;
}

basis_t position_mask(std::span<const party_t> positions, int n) {
  check_positions(positions, n);
  basis_t m = 0;
  for (party_t p : positions) m |= party_weight(p, n);
  return m;
}

std::vector<basis_t> enumerate_suffixes(std::span<const party_t> positions,
                                        std::span<const int> bits, int n) {
  const basis_t base = least_suffix(positions, bits, n);
  const basis_t fixed = position_mask(positions, n);
  const basis_t full = (basis_t{1} << n) - 1;
  const basis_t free_mask = full & ~fixed;
  const int m = static_cast<int>(positions.size());
  std::vector<basis_t> out;
  out.reserve(basis_t{1} << (n - m));
  // Ascending enumeration of the subsets of free_mask via masked increment.
  basis_t s = 0;
  while (true) {
    out.push_back(base | s);
    if (s == free_mask) break;
    s = (s - free_mask) & free_mask;
  }
  return out;
}

Coverage coverage_graph_connected(const std::set<Pair>& pairs, int n) {
  check_ambient(n);
  std::vector<int> parent(static_cast<std::size_t>(n) + 1);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (const auto& [a, b] : pairs) {
    check_party(a, n);
    check_party(b, n);
    if (a == b) throw std::invalid_argument("pair members must differ");
    parent[static_cast<std::size_t>(find(a))] = find(b);
  }
  std::vector<std::vector<party_t>> comps;
  std::vector<int> root_slot(static_cast<std::size_t>(n) + 1, -1);
  for (int v = 1; v <= n; ++v) {
    const int r = find(v);
    if (root_slot[static_cast<std::size_t>(r)] < 0) {
      root_slot[static_cast<std::size_t>(r)] = static_cast<int>(comps.size());
      comps.emplace_back();
    }
    comps[static_cast<std::size_t>(root_slot[static_cast<std::size_t>(r)])]
        .push_back(v);
  }
  return {comps.size() == 1, std::move(comps)};
}

}  // namespace qmarg
