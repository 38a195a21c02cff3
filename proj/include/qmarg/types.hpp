#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

namespace qmarg {

using cx = std::complex<double>;
using cvec = Eigen::VectorXcd;
using cmat = Eigen::MatrixXcd;
using rvec = Eigen::VectorXd;
using rmat = Eigen::MatrixXd;

/// Computational-basis index; the n-bit big-endian expansion is the basis string.
using basis_t = std::uint64_t;

/// 1-based party label. Party 1 owns the most significant bit (weight 2^{n-1}),
/// party j owns weight 2^{n-j}.
using party_t = int;

/// Unordered party pair, canonicalized as (min, max).
using Pair = std::pair<party_t, party_t>;

inline Pair make_pair_canonical(party_t a, party_t b) {
  if (a == b) throw std::invalid_argument("party pair must have distinct members");
  return a < b ? Pair{a, b} : Pair{b, a};
}

/// Shared numerical tolerances. Defaults suit exact analytic inputs perturbed
/// only by floating-point noise; all are overridable per call.
struct Tolerances {
  double norm = 1e-10;         // trace / state normalization
  double herm = 1e-10;         // hermiticity
  double psd = 1e-9;           // allowed negative eigenvalue slack
  double zero = 1e-8;          // must-vanish entries (reconstruction)
  double consistency = 1e-8;   // cross-marginal agreement (reconstruction)
};

/// Thrown when a request exceeds a dense-representation resource cap.
struct CapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown on malformed input files.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qmarg
