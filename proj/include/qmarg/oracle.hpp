#pragma once

// Numerical companions to the reconstruction guarantees: the linear map from
// traceless Hermitian perturbations to stacked pair-marginal perturbations,
// its null space, first-order PSD feasibility evidence around |W><W|, the
// phase-twist counterexample family, and a multi-start fit over the
// vacuum + single-excitation subspace. Everything here produces evidence or
// witnesses; nothing here is needed for reconstruction itself.

#include <cstdint>
#include <set>
#include <vector>

#include "qmarg/reconstruct.hpp"
#include "qmarg/states.hpp"
#include "qmarg/types.hpp"

namespace qmarg {

/// Perturbation analysis is capped here: the traceless Hermitian space has
/// 4^n - 1 dimensions and the map matrix stores one column per dimension.
inline constexpr int kMarginalMapCap = 7;

/// Dimension of the traceless Hermitian space on n qubits: 4^n - 1.
Eigen::Index herm_dim(int n);

/// Orthonormal (Frobenius) basis of traceless Hermitian matrices, indexed
/// 0..herm_dim(n)-1: first the symmetric pair generators (|a><b|+|b><a|)/sqrt2
/// for a < b in lexicographic order, then the antisymmetric ones
/// (-i|a><b|+i|b><a|)/sqrt2, then the diagonal ladder
/// diag(1,..,1,-k,0,..)/sqrt(k(k+1)) for k = 1..2^n-1.
cmat herm_basis_element(int n, Eigen::Index idx);

/// Expansion of H = sum_j coords(j) * basis_j back to a dense matrix.
cmat materialize(int n, const rvec& coords);

/// Frobenius coordinates of a traceless Hermitian matrix in the basis above.
rvec coordinates(int n, const cmat& h);

/// Partial trace of an arbitrary 2^n x 2^n matrix onto the pair (J,K);
/// no density-matrix validation, suitable for perturbations.
Eigen::Matrix4cd pair_block(const cmat& m, int n, party_t J, party_t K);

/// The 16 real parameters of one (Hermitian) 4x4 pair block, stacked as
/// [diag 0..3 | Re of entries (0,1),(0,2),(0,3),(1,2),(1,3),(2,3) | Im of
/// the same six], concatenated over `pairs` in ascending key order.
rvec stacked_marginals(const cmat& m, int n, const std::set<Pair>& pairs);

/// The linear map from traceless Hermitian coordinates to stacked pair-block
/// parameters: matrix column j is stacked_marginals(basis_j).
struct MarginalMap {
  int n = 0;
  std::set<Pair> pairs;
  rmat matrix;  // (16 * |pairs|) x herm_dim(n)
};
MarginalMap build_marginal_map(int n, const std::set<Pair>& pairs);

/// Orthonormal coordinate basis of the kernel of a marginal map: the
/// traceless Hermitian directions along which every listed pair marginal
/// stays fixed. Columns are herm-basis coordinates; materialize() turns one
/// into a matrix. Numerical rank uses singular values relative to the
/// largest: anything below rank_tol * sigma_max counts as kernel.
struct NullSpaceResult {
  Eigen::Index rank = 0;
  rmat basis;  // herm_dim(n) x kernel_dim
};
NullSpaceResult null_space(const MarginalMap& map, double rank_tol = 1e-10);

/// First-order PSD feasibility evidence around |W(c)><W(c)|. For a direction
/// H in the kernel, rho + tH can stay PSD for some t != 0 only if the
/// compression of +H or of -H onto the orthocomplement of |W(c)> is PSD;
/// every tested direction is graded by that necessary condition.
/// Tested directions are `samples` uniform unit vectors on the kernel sphere
/// plus, when the pair coverage graph is disconnected, deterministic
/// structured probes derived from the component split: the component-product
/// direction (tensor product of component marginals minus |W><W|) and one
/// phase-twist tangent per extra component. Probes are independently checked
/// to lie in the kernel (their stacked marginals vanish) before being graded.
struct UniquenessEvidence {
  int n = 0;
  std::uint64_t seed = 0;
  std::size_t samples = 0;         // random directions drawn
  Eigen::Index nullspace_dim = 0;
  std::size_t probes_tested = 0;
  std::size_t raw_feasible = 0;    // feasible among random samples
  std::size_t probe_feasible = 0;  // feasible among structured probes
  std::size_t feasible_count = 0;  // raw_feasible + probe_feasible
  /// Best closeness to feasibility over all tested directions:
  /// max over directions of max(lambda_min(C), -lambda_max(C)) where C is
  /// the kernel compression; >= -psd tolerance means feasible. -1 when no
  /// direction was tested (empty kernel).
  double best_closeness = -1.0;
};
UniquenessEvidence uniqueness_evidence(const WCoefficients& c,
                                       const std::set<Pair>& pairs,
                                       std::size_t samples, std::uint64_t seed,
                                       const Tolerances& tol = {});

/// Multiplies the coefficients of each block by its phase factor and builds
/// the resulting W-class state. Blocks must partition 1..n; marginals of
/// pairs inside one block are exactly those of make_w(c).
PureState phase_twist(const WCoefficients& c,
                      const std::vector<std::vector<party_t>>& blocks,
                      const std::vector<double>& phases);

/// The twisted coefficient vector itself (phase_twist = make_w of this).
WCoefficients twist_coefficients(const WCoefficients& c,
                                 const std::vector<std::vector<party_t>>& blocks,
                                 const std::vector<double>& phases);

/// One local minimizer of the marginal-matching objective over normalized
/// states a0|0..0> + sum_J z_J |single one at J>.
struct FitResult {
  cvec params;      // length n+1: (a0, z_1..z_n), unit norm, gauge-fixed
  double residual;  // sqrt of sum over pairs of squared Frobenius mismatch
  int iterations = 0;
  bool converged = false;
};

struct MultistartFit {
  bool applicable = true;  // corner entries of all inputs vanish
  std::string note;        // why not, when !applicable
  std::vector<FitResult> minimizers;  // deduplicated, sorted by residual
};

/// Projected gradient descent with backtracking from `starts` random unit
/// starts; minimizers are deduplicated up to global phase. The restriction
/// to the vacuum + single-excitation subspace is justified exactly when all
/// supplied corner entries (3,3) vanish; otherwise the fit is reported as
/// not applicable rather than run on the wrong manifold.
MultistartFit multistart_pure_fit(const MarginalSet& ms, int starts,
                                  std::uint64_t seed, int max_iters = 2000);

}  // namespace qmarg
