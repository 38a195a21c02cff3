#include "qmarg/states.hpp"

#include <cmath>
#include <string>

#include "qmarg/bitindex.hpp"
#include "qmarg/kernels.hpp"

namespace qmarg {

namespace {

void check_dense_vector_cap(int n) {
  check_ambient(n);
  if (n > kDenseVectorCap)
    throw CapExceeded("dense amplitude vectors are capped at n = " +
                      std::to_string(kDenseVectorCap) + ", got n = " +
                      std::to_string(n));
}

void check_dense_matrix_cap(int n) {
  check_ambient(n);
  if (n > kDenseMatrixCap)
    throw CapExceeded("dense matrices are capped at n = " +
                      std::to_string(kDenseMatrixCap) + ", got n = " +
                      std::to_string(n));
}

void check_hermitian_unit_trace_psd(const cmat& m, const Tolerances& tol,
                                    const char* what) {
  const std::string who(what);
  if (m.rows() != m.cols())
    throw std::invalid_argument(who + ": matrix must be square");
  const double herm_defect = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (herm_defect > tol.herm)
    throw std::invalid_argument(who + ": hermiticity defect " +
                                std::to_string(herm_defect) + " exceeds " +
                                std::to_string(tol.herm));
  const cx tr = m.trace();
  if (std::abs(tr - cx(1.0, 0.0)) > tol.norm)
    throw std::invalid_argument(who + ": trace deviates from 1 by " +
                                std::to_string(std::abs(tr - cx(1.0, 0.0))));
  Eigen::SelfAdjointEigenSolver<cmat> es(m, Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -tol.psd)
    throw std::invalid_argument(who + ": minimum eigenvalue " +
                                std::to_string(min_eig) + " below -" +
                                std::to_string(tol.psd));
}

void check_pair(party_t J, party_t K, int n) {
  if (n < 2) throw std::invalid_argument("need at least two parties");
  if (J < 1 || K < 1 || J > n || K > n)
    throw std::out_of_range("party labels must lie in 1.." +
                            std::to_string(n));
  if (J >= K) throw std::invalid_argument("pair labels must satisfy J < K");
}

}  // namespace

void validate_pure_state(const PureState& psi, const Tolerances& tol) {
  check_dense_vector_cap(psi.n);
  if (psi.amplitudes.size() != Eigen::Index(basis_t{1} << psi.n))
    throw std::invalid_argument("amplitude count must be 2^n");
  const double nrm2 = kernels::sum_abs2(
      {psi.amplitudes.data(), static_cast<std::size_t>(psi.amplitudes.size())});
  if (std::abs(nrm2 - 1.0) > tol.norm)
    throw std::invalid_argument("state norm^2 deviates from 1 by " +
                                std::to_string(std::abs(nrm2 - 1.0)));
}

void validate_density_matrix(const DensityMatrix& rho, const Tolerances& tol) {
  check_dense_matrix_cap(rho.n);
  if (rho.entries.rows() != Eigen::Index(basis_t{1} << rho.n))
    throw std::invalid_argument("matrix dimension must be 2^n");
  check_hermitian_unit_trace_psd(rho.entries, tol, "density matrix");
}

void validate_w_coefficients(const WCoefficients& c, const Tolerances& tol) {
  if (c.n < 2) throw std::invalid_argument("W coefficients need n >= 2");
  if (c.c.size() != c.n)
    throw std::invalid_argument("coefficient count must equal n");
  const double nrm2 = c.c.squaredNorm();
  if (std::abs(nrm2 - 1.0) > tol.norm)
    throw std::invalid_argument("coefficient norm^2 deviates from 1 by " +
                                std::to_string(std::abs(nrm2 - 1.0)));
}

void validate_rdm(const Rdm& rdm, const Tolerances& tol) {
  if (rdm.ambient_n < 1)
    throw std::invalid_argument("ambient party count must be positive");
  const int m = static_cast<int>(rdm.parties.size());
  if (m < 1) throw std::invalid_argument("party subset must be non-empty");
  if (m > kDenseMatrixCap)
    throw CapExceeded("reduced matrices are capped at " +
                      std::to_string(kDenseMatrixCap) + " parties, got " +
                      std::to_string(m));
  party_t prev = 0;
  for (party_t p : rdm.parties) {
    if (p < 1 || p > rdm.ambient_n)
      throw std::out_of_range("party label " + std::to_string(p) +
                              " outside 1.." + std::to_string(rdm.ambient_n));
    if (p <= prev)
      throw std::invalid_argument("party subset must be strictly increasing");
    prev = p;
  }
  if (rdm.entries.rows() != Eigen::Index(basis_t{1} << m))
    throw std::invalid_argument("matrix dimension must be 2^m");
  check_hermitian_unit_trace_psd(rdm.entries, tol, "reduced density matrix");
}

PureState make_pure_state(int n, cvec amplitudes, const Tolerances& tol) {
  PureState psi{n, std::move(amplitudes)};
  validate_pure_state(psi, tol);
  return psi;
}

DensityMatrix make_density_matrix(int n, cmat entries, const Tolerances& tol) {
  DensityMatrix rho{n, std::move(entries)};
  validate_density_matrix(rho, tol);
  return rho;
}

WCoefficients make_w_coefficients(cvec c, const Tolerances& tol) {
  WCoefficients w{static_cast<int>(c.size()), std::move(c)};
  validate_w_coefficients(w, tol);
  return w;
}

Rdm make_rdm(std::vector<party_t> parties, int ambient_n, cmat entries,
             const Tolerances& tol) {
  Rdm rdm{std::move(parties), ambient_n, std::move(entries)};
  validate_rdm(rdm, tol);
  return rdm;
}

PureState make_w(const WCoefficients& c) {
  validate_w_coefficients(c);
  check_dense_vector_cap(c.n);
  PureState psi{c.n, cvec::Zero(Eigen::Index(basis_t{1} << c.n))};
  for (party_t J = 1; J <= c.n; ++J)
    psi.amplitudes(Eigen::Index(single_one_index(J, c.n))) = c.c(J - 1);
  return psi;
}

DensityMatrix w_density(const WCoefficients& c) {
  validate_w_coefficients(c);
  check_dense_matrix_cap(c.n);
  const Eigen::Index dim = Eigen::Index(basis_t{1} << c.n);
  DensityMatrix rho{c.n, cmat::Zero(dim, dim)};
  for (party_t J = 1; J <= c.n; ++J)
    for (party_t K = 1; K <= c.n; ++K)
      rho.entries(Eigen::Index(single_one_index(J, c.n)),
                  Eigen::Index(single_one_index(K, c.n))) =
          c.c(J - 1) * std::conj(c.c(K - 1));
  return rho;
}

Rdm w_bipartite_marginal(const WCoefficients& c, party_t J, party_t K) {
  validate_w_coefficients(c);
  check_pair(J, K, c.n);
  const cx cJ = c.c(J - 1);
  const cx cK = c.c(K - 1);
  cmat m = cmat::Zero(4, 4);
  m(0, 0) = 1.0 - std::norm(cJ) - std::norm(cK);
  m(1, 1) = std::norm(cK);
  m(2, 2) = std::norm(cJ);
  m(1, 2) = cK * std::conj(cJ);
  m(2, 1) = std::conj(m(1, 2));
  return Rdm{{J, K}, c.n, std::move(m)};
}

PsiPlusDecomposition psi_plus_decomposition(const WCoefficients& c, party_t J,
                                            party_t K) {
  validate_w_coefficients(c);
  check_pair(J, K, c.n);
  const cx cJ = c.c(J - 1);
  const cx cK = c.c(K - 1);
  PsiPlusDecomposition d;
  d.vec << cx(0.0), cK, cJ, cx(0.0);
  d.residual_weight = 1.0 - std::norm(cJ) - std::norm(cK);
  return d;
}

cx overlap(const PureState& a, const PureState& b) {
  if (a.n != b.n)
    throw std::invalid_argument("overlap: qubit counts differ");
  return kernels::conj_dot(
      {a.amplitudes.data(), static_cast<std::size_t>(a.amplitudes.size())},
      {b.amplitudes.data(), static_cast<std::size_t>(b.amplitudes.size())});
}

}  // namespace qmarg
