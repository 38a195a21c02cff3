#include "qmarg/ptrace.hpp"

#include <string>

#include "qmarg/bitindex.hpp"
#include "qmarg/kernels.hpp"

namespace qmarg {

namespace {

void check_subset(std::span<const party_t> parties, int n) {
  if (parties.empty())
    throw std::invalid_argument("party subset must be non-empty");
  check_positions(parties, n);
  if (static_cast<int>(parties.size()) > kDenseMatrixCap)
    throw CapExceeded("reduced matrices are capped at " +
                      std::to_string(kDenseMatrixCap) + " parties");
}

}  // namespace

std::vector<DiagonalExpression> diagonal_expressions(
    const PureState& psi, std::span<const party_t> parties) {
  validate_pure_state(psi);
  check_subset(parties, psi.n);
  const int m = static_cast<int>(parties.size());
  std::vector<DiagonalExpression> exprs;
  exprs.reserve(std::size_t{1} << m);
  std::vector<int> bits(parties.size());
  for (basis_t i = 0; i < (basis_t{1} << m); ++i) {
    for (int k = 0; k < m; ++k)
      bits[static_cast<std::size_t>(k)] =
          static_cast<int>((i >> (m - 1 - k)) & 1u);
    DiagonalExpression e;
    e.rdm_index = i;
    e.suffixes = enumerate_suffixes(parties, bits, psi.n);
    e.terms.reserve(e.suffixes.size());
    for (basis_t g : e.suffixes)
      e.terms.push_back(psi.amplitudes(Eigen::Index(g)));
    exprs.push_back(std::move(e));
  }
  return exprs;
}

Rdm rdm_from_pure(const PureState& psi, std::span<const party_t> parties) {
  const auto exprs = diagonal_expressions(psi, parties);
  const Eigen::Index dim = Eigen::Index(exprs.size());
  cmat r = cmat::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const auto& pi = exprs[static_cast<std::size_t>(i)].terms;
    r(i, i) = kernels::sum_abs2({pi.data(), pi.size()});
    for (Eigen::Index j = i + 1; j < dim; ++j) {
      const auto& qj = exprs[static_cast<std::size_t>(j)].terms;
      r(i, j) = kernels::conj_dot({pi.data(), pi.size()},
                                  {qj.data(), qj.size()});
      r(j, i) = std::conj(r(i, j));
    }
  }
  return Rdm{{parties.begin(), parties.end()}, psi.n, std::move(r)};
}

Rdm rdm_from_density(const DensityMatrix& rho,
                     std::span<const party_t> parties) {
  validate_density_matrix(rho);
  check_subset(parties, rho.n);
  const int n = rho.n;
  const int m = static_cast<int>(parties.size());
  const basis_t kept = position_mask(parties, n);
  const basis_t dim_n = basis_t{1} << n;
  // Gather the kept bits of a global index into an m-bit reduced index.
  auto reduce = [&](basis_t g) {
    basis_t r = 0;
    for (int k = 0; k < m; ++k)
      r = (r << 1) | ((g >> (n - parties[static_cast<std::size_t>(k)])) & 1u);
    return r;
  };
  cmat out = cmat::Zero(Eigen::Index(basis_t{1} << m),
                        Eigen::Index(basis_t{1} << m));
  for (basis_t g1 = 0; g1 < dim_n; ++g1) {
    for (basis_t g2 = 0; g2 < dim_n; ++g2) {
      if ((g1 & ~kept) != (g2 & ~kept)) continue;
      out(Eigen::Index(reduce(g1)), Eigen::Index(reduce(g2))) +=
          rho.entries(Eigen::Index(g1), Eigen::Index(g2));
    }
  }
  return Rdm{{parties.begin(), parties.end()}, n, std::move(out)};
}

double marginal_residual(const Rdm& a, const Rdm& b) {
  if (a.ambient_n != b.ambient_n)
    throw std::invalid_argument("marginal_residual: ambient sizes differ");
  if (a.parties != b.parties)
    throw std::invalid_argument("marginal_residual: party subsets differ");
  return (a.entries - b.entries).cwiseAbs().maxCoeff();
}

}  // namespace qmarg
