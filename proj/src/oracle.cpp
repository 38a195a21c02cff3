#include "qmarg/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <tuple>

#include "qmarg/bitindex.hpp"
#include "qmarg/ptrace.hpp"

namespace qmarg {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_map_cap(int n) {
  check_ambient(n);
  if (n > kMarginalMapCap)
    throw CapExceeded("marginal-map analysis is capped at n = " +
                      std::to_string(kMarginalMapCap) + ", got n = " +
                      std::to_string(n));
}

void check_pairs(const std::set<Pair>& pairs, int n) {
  if (pairs.empty()) throw std::invalid_argument("pair set is empty");
  for (const auto& [J, K] : pairs)
    if (J < 1 || K <= J || K > n)
      throw std::invalid_argument("pair (" + std::to_string(J) + "," +
                                  std::to_string(K) +
                                  ") is not canonical within 1.." +
                                  std::to_string(n));
}

struct Trip {
  basis_t r, c;
  cx v;
};

/// Sparse form of herm_basis_element; same index convention.
std::vector<Trip> herm_basis_sparse(int n, Eigen::Index idx) {
  const basis_t d = basis_t{1} << n;
  const Eigen::Index npairs = Eigen::Index(d * (d - 1) / 2);
  if (idx < 0 || idx >= herm_dim(n))
    throw std::out_of_range("basis index out of range");
  if (idx < 2 * npairs) {
    const bool antisym = idx >= npairs;
    Eigen::Index p = antisym ? idx - npairs : idx;
    // Invert the lexicographic pair index (a,b), a < b.
    basis_t a = 0;
    Eigen::Index row_len = Eigen::Index(d - 1);
    while (p >= row_len) {
      p -= row_len;
      --row_len;
      ++a;
    }
    const basis_t b = a + 1 + basis_t(p);
    if (antisym)
      return {{a, b, cx(0.0, -kInvSqrt2)}, {b, a, cx(0.0, kInvSqrt2)}};
    return {{a, b, cx(kInvSqrt2)}, {b, a, cx(kInvSqrt2)}};
  }
  const basis_t k = basis_t(idx - 2 * npairs) + 1;  // 1..d-1
  const double s = 1.0 / std::sqrt(double(k) * double(k + 1));
  std::vector<Trip> out;
  out.reserve(k + 1);
  for (basis_t a = 0; a < k; ++a) out.push_back({a, a, cx(s)});
  out.push_back({k, k, cx(-double(k) * s)});
  return out;
}

/// Scatters the triplets of a global matrix into its (J,K) pair block.
Eigen::Matrix4cd pair_block_sparse(const std::vector<Trip>& trips, int n,
                                   party_t J, party_t K) {
  const basis_t wJ = basis_t{1} << (n - J);
  const basis_t wK = basis_t{1} << (n - K);
  const basis_t outside = ~(wJ | wK);
  Eigen::Matrix4cd block = Eigen::Matrix4cd::Zero();
  for (const auto& t : trips) {
    if ((t.r & outside) != (t.c & outside)) continue;
    const int i = int(((t.r & wJ) ? 2 : 0) | ((t.r & wK) ? 1 : 0));
    const int j = int(((t.c & wJ) ? 2 : 0) | ((t.c & wK) ? 1 : 0));
    block(i, j) += t.v;
  }
  return block;
}

/// 16 real parameters of a Hermitian 4x4 block, in the documented order.
void write_block_params(const Eigen::Matrix4cd& b, double* out) {
  for (int i = 0; i < 4; ++i) out[i] = b(i, i).real();
  static constexpr int ui[6] = {0, 0, 0, 1, 1, 2};
  static constexpr int uj[6] = {1, 2, 3, 2, 3, 3};
  for (int e = 0; e < 6; ++e) {
    out[4 + e] = b(ui[e], uj[e]).real();
    out[10 + e] = b(ui[e], uj[e]).imag();
  }
}

cvec w_amplitudes(const WCoefficients& c) { return make_w(c).amplitudes; }

/// Orthonormal basis of the orthocomplement of a unit vector w.
cmat orthocomplement(const cvec& w) {
  const Eigen::Index d = w.size();
  Eigen::HouseholderQR<cmat> qr(w);
  cmat q = qr.householderQ();
  // First column of q is w up to phase; the rest span its complement.
  return q.rightCols(d - 1);
}

/// Closeness to first-order PSD feasibility of the compression C:
/// max(lambda_min(C), -lambda_max(C)). Values >= -tol mean the direction
/// (with one of its signs) passes the necessary condition.
double feasibility_closeness(const cmat& compression) {
  Eigen::SelfAdjointEigenSolver<cmat> es(compression,
                                         Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  return std::max(lo, -hi);
}

}  // namespace

Eigen::Index herm_dim(int n) {
  check_map_cap(n);
  return (Eigen::Index(1) << (2 * n)) - 1;
}

cmat herm_basis_element(int n, Eigen::Index idx) {
  const Eigen::Index d = Eigen::Index(basis_t{1} << n);
  cmat m = cmat::Zero(d, d);
  for (const auto& t : herm_basis_sparse(n, idx))
    m(Eigen::Index(t.r), Eigen::Index(t.c)) = t.v;
  return m;
}

cmat materialize(int n, const rvec& coords) {
  if (coords.size() != herm_dim(n))
    throw std::invalid_argument("coordinate vector has wrong dimension");
  const Eigen::Index d = Eigen::Index(basis_t{1} << n);
  cmat m = cmat::Zero(d, d);
  for (Eigen::Index j = 0; j < coords.size(); ++j) {
    const double a = coords(j);
    if (a == 0.0) continue;
    for (const auto& t : herm_basis_sparse(n, j))
      m(Eigen::Index(t.r), Eigen::Index(t.c)) += a * t.v;
  }
  return m;
}

rvec coordinates(int n, const cmat& h) {
  const Eigen::Index d = Eigen::Index(basis_t{1} << n);
  if (h.rows() != d || h.cols() != d)
    throw std::invalid_argument("matrix has wrong dimension");
  rvec coords(herm_dim(n));
  for (Eigen::Index j = 0; j < coords.size(); ++j) {
    cx acc = 0.0;
    for (const auto& t : herm_basis_sparse(n, j))
      acc += std::conj(t.v) * h(Eigen::Index(t.r), Eigen::Index(t.c));
    coords(j) = acc.real();
  }
  return coords;
}

Eigen::Matrix4cd pair_block(const cmat& m, int n, party_t J, party_t K) {
  check_ambient(n);
  if (J < 1 || K <= J || K > n)
    throw std::invalid_argument("pair labels must satisfy 1 <= J < K <= n");
  const Eigen::Index d = Eigen::Index(basis_t{1} << n);
  if (m.rows() != d || m.cols() != d)
    throw std::invalid_argument("matrix has wrong dimension");
  const std::vector<party_t> parties{J, K};
  std::vector<basis_t> suffixes[4];
  for (int i = 0; i < 4; ++i) {
    const std::vector<int> bits{(i >> 1) & 1, i & 1};
    suffixes[i] = enumerate_suffixes(parties, bits, n);
  }
  Eigen::Matrix4cd block = Eigen::Matrix4cd::Zero();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      cx acc = 0.0;
      for (std::size_t k = 0; k < suffixes[i].size(); ++k)
        acc += m(Eigen::Index(suffixes[i][k]), Eigen::Index(suffixes[j][k]));
      block(i, j) = acc;
    }
  return block;
}

rvec stacked_marginals(const cmat& m, int n, const std::set<Pair>& pairs) {
  check_pairs(pairs, n);
  rvec out(16 * Eigen::Index(pairs.size()));
  Eigen::Index offset = 0;
  for (const auto& [J, K] : pairs) {
    write_block_params(pair_block(m, n, J, K), out.data() + offset);
    offset += 16;
  }
  return out;
}

MarginalMap build_marginal_map(int n, const std::set<Pair>& pairs) {
  check_map_cap(n);
  check_pairs(pairs, n);
  const Eigen::Index dim = herm_dim(n);
  MarginalMap map;
  map.n = n;
  map.pairs = pairs;
  map.matrix.resize(16 * Eigen::Index(pairs.size()), dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    const auto trips = herm_basis_sparse(n, j);
    Eigen::Index offset = 0;
    for (const auto& [J, K] : pairs) {
      double params[16];
      write_block_params(pair_block_sparse(trips, n, J, K), params);
      for (int r = 0; r < 16; ++r) map.matrix(offset + r, j) = params[r];
      offset += 16;
    }
  }
  return map;
}

NullSpaceResult null_space(const MarginalMap& map, double rank_tol) {
  const Eigen::Index dim = map.matrix.cols();
  NullSpaceResult out;
  Eigen::BDCSVD<rmat> svd(map.matrix);
  const auto& sv = svd.singularValues();
  const double cutoff = sv.size() ? sv(0) * rank_tol : 0.0;
  out.rank = (sv.array() > cutoff).count();
  const Eigen::Index kdim = dim - out.rank;
  if (kdim == 0) {
    out.basis.resize(dim, 0);
    return out;
  }
  // Trailing columns of Q from a pivoted QR of the transpose span the
  // orthocomplement of the row space, i.e. the kernel.
  Eigen::ColPivHouseholderQR<rmat> qr(map.matrix.transpose());
  rmat tail = rmat::Zero(dim, kdim);
  tail.bottomRows(kdim).setIdentity();
  out.basis = qr.householderQ() * tail;
  return out;
}

UniquenessEvidence uniqueness_evidence(const WCoefficients& c,
                                       const std::set<Pair>& pairs,
                                       std::size_t samples, std::uint64_t seed,
                                       const Tolerances& tol) {
  validate_w_coefficients(c);
  check_map_cap(c.n);
  check_pairs(pairs, c.n);
  const int n = c.n;

  UniquenessEvidence ev;
  ev.n = n;
  ev.seed = seed;

  const NullSpaceResult ns = null_space(build_marginal_map(n, pairs));
  ev.nullspace_dim = ns.basis.cols();
  if (ev.nullspace_dim == 0) return ev;  // nothing can move: trivial success

  const cvec w = w_amplitudes(c);
  const cmat comp_basis = orthocomplement(w);

  // Pre-compress the kernel basis when it fits comfortably in memory;
  // otherwise materialize per sample.
  const Eigen::Index cd = comp_basis.cols();
  const bool precompress =
      std::size_t(ev.nullspace_dim) * std::size_t(cd) * std::size_t(cd) *
          sizeof(cx) <
      std::size_t{512} * 1024 * 1024;
  std::vector<cmat> compressed;
  if (precompress) {
    compressed.reserve(std::size_t(ev.nullspace_dim));
    for (Eigen::Index k = 0; k < ev.nullspace_dim; ++k) {
      const cmat h = materialize(n, ns.basis.col(k));
      compressed.push_back(comp_basis.adjoint() * h * comp_basis);
    }
  }

  ev.samples = samples;
  for (std::size_t s = 0; s < samples; ++s) {
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(s + 1)));
    std::normal_distribution<double> g(0.0, 1.0);
    rvec u(ev.nullspace_dim);
    for (Eigen::Index k = 0; k < u.size(); ++k) u(k) = g(rng);
    const double norm = u.norm();
    if (norm == 0.0) continue;
    u /= norm;
    cmat compression;
    if (precompress) {
      compression = cmat::Zero(cd, cd);
      for (Eigen::Index k = 0; k < u.size(); ++k)
        compression += u(k) * compressed[std::size_t(k)];
    } else {
      const cmat h = materialize(n, ns.basis * u);
      compression = comp_basis.adjoint() * h * comp_basis;
    }
    const double closeness = feasibility_closeness(compression);
    ev.best_closeness = std::max(ev.best_closeness, closeness);
    if (closeness >= -tol.psd) ++ev.raw_feasible;
  }

  // Structured probes exist exactly when the coverage graph splits: the
  // component-product direction and one phase-twist tangent per extra
  // component are then flat directions of the marginal constraints.
  const Coverage cov = coverage_graph_connected(pairs, n);
  if (!cov.connected) {
    const Eigen::Index d = w.size();
    std::vector<cmat> probes;

    // Tensor product of the component marginals, minus the projector.
    {
      const PureState psi = make_w(c);
      std::vector<Rdm> rdms;
      std::vector<std::vector<party_t>> comps = cov.components;
      for (const auto& comp : comps) rdms.push_back(rdm_from_pure(psi, comp));
      cmat prod(d, d);
      for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index b = 0; b < d; ++b) {
          cx val = 1.0;
          for (std::size_t ci = 0; ci < comps.size(); ++ci) {
            basis_t ra = 0, rb = 0;
            for (party_t p : comps[ci]) {
              ra = (ra << 1) | ((basis_t(a) >> (n - p)) & 1u);
              rb = (rb << 1) | ((basis_t(b) >> (n - p)) & 1u);
            }
            val *= rdms[ci].entries(Eigen::Index(ra), Eigen::Index(rb));
          }
          prod(a, b) = val;
        }
      probes.push_back(prod - w * w.adjoint());
    }

    // Phase-twist tangents: rotate one component's coefficients.
    for (std::size_t ci = 1; ci < cov.components.size(); ++ci) {
      cvec x = cvec::Zero(d);
      for (party_t p : cov.components[ci])
        x(Eigen::Index(single_one_index(p, n))) = cx(0.0, 1.0) * c.c(p - 1);
      probes.push_back(x * w.adjoint() + w * x.adjoint());
    }

    for (cmat& h : probes) {
      h = ((h + h.adjoint()) / 2.0).eval();  // scrub float asymmetry
      const double fro = h.norm();
      if (fro < 1e-12) continue;  // degenerate (e.g. all weight in one block)
      h /= fro;
      // Membership check: a probe must actually lie in the kernel.
      if (std::abs(h.trace()) > 1e-12) continue;
      if (stacked_marginals(h, n, pairs).cwiseAbs().maxCoeff() > 1e-9)
        continue;
      ++ev.probes_tested;
      const double closeness =
          feasibility_closeness(comp_basis.adjoint() * h * comp_basis);
      ev.best_closeness = std::max(ev.best_closeness, closeness);
      if (closeness >= -tol.psd) ++ev.probe_feasible;
    }
  }

  ev.feasible_count = ev.raw_feasible + ev.probe_feasible;
  return ev;
}

WCoefficients twist_coefficients(
    const WCoefficients& c, const std::vector<std::vector<party_t>>& blocks,
    const std::vector<double>& phases) {
  validate_w_coefficients(c);
  if (blocks.size() != phases.size())
    throw std::invalid_argument("need exactly one phase per block");
  std::vector<int> owner(std::size_t(c.n) + 1, -1);
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (party_t p : blocks[b]) {
      if (p < 1 || p > c.n)
        throw std::invalid_argument("party label " + std::to_string(p) +
                                    " outside 1.." + std::to_string(c.n));
      if (owner[std::size_t(p)] != -1)
        throw std::invalid_argument("party " + std::to_string(p) +
                                    " appears in more than one block");
      owner[std::size_t(p)] = int(b);
    }
  for (party_t p = 1; p <= c.n; ++p)
    if (owner[std::size_t(p)] == -1)
      throw std::invalid_argument("party " + std::to_string(p) +
                                  " is missing from the block partition");
  WCoefficients out{c.n, c.c};
  for (party_t p = 1; p <= c.n; ++p)
    out.c(p - 1) *= std::polar(1.0, phases[std::size_t(owner[std::size_t(p)])]);
  return out;
}

PureState phase_twist(const WCoefficients& c,
                      const std::vector<std::vector<party_t>>& blocks,
                      const std::vector<double>& phases) {
  return make_w(twist_coefficients(c, blocks, phases));
}

namespace {

/// Closed-form pair marginal of a0|0..0> + sum_J z_J |e_J>; rows ordered as
/// everywhere else. rest = |a0|^2 + sum of |z_L|^2 over parties off the pair.
Eigen::Matrix4cd model_pair(const cvec& z, party_t J, party_t K) {
  const cx a0 = z(0);
  const cx zJ = z(J);
  const cx zK = z(K);
  const double rest = z.squaredNorm() - std::norm(zJ) - std::norm(zK);
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 0) = rest;
  m(1, 1) = std::norm(zK);
  m(2, 2) = std::norm(zJ);
  m(0, 1) = a0 * std::conj(zK);
  m(1, 0) = std::conj(m(0, 1));
  m(0, 2) = a0 * std::conj(zJ);
  m(2, 0) = std::conj(m(0, 2));
  m(1, 2) = zK * std::conj(zJ);
  m(2, 1) = std::conj(m(1, 2));
  return m;
}

double fit_objective(const cvec& z, const MarginalSet& ms) {
  double f = 0.0;
  for (const auto& [key, rdm] : ms.entries)
    f += (model_pair(z, key.first, key.second) - rdm.entries).squaredNorm();
  return f;
}

/// Gradient with respect to conj(z): the steepest-ascent direction of the
/// real objective in complex coordinates.
cvec fit_gradient(const cvec& z, const MarginalSet& ms) {
  cvec g = cvec::Zero(z.size());
  for (const auto& [key, rdm] : ms.entries) {
    const party_t J = key.first, K = key.second;
    const Eigen::Matrix4cd d = model_pair(z, J, K) - rdm.entries;
    g(0) += 2.0 * (d(0, 0) * z(0) + d(0, 1) * z(K) + d(0, 2) * z(J));
    g(K) += 2.0 * (d(1, 1) * z(K) + d(1, 0) * z(0) + d(1, 2) * z(J));
    g(J) += 2.0 * (d(2, 2) * z(J) + d(2, 0) * z(0) + d(2, 1) * z(K));
    const cx d00 = d(0, 0);
    for (Eigen::Index l = 1; l <= ms.n; ++l)
      if (l != J && l != K) g(l) += 2.0 * d00 * z(l);
  }
  return g;
}

cvec gauge_fix_params(cvec z) {
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < z.size(); ++j)
    if (std::abs(z(j)) > std::abs(z(best))) best = j;
  const cx top = z(best);
  if (std::abs(top) > 0.0) z *= std::conj(top) / std::abs(top);
  z(best) = std::abs(z(best));
  return z;
}

}  // namespace

MultistartFit multistart_pure_fit(const MarginalSet& ms, int starts,
                                  std::uint64_t seed, int max_iters) {
  check_marginal_set(ms);
  if (ms.n > 12)
    throw CapExceeded("pure fit parameterization is capped at n = 12");
  if (starts < 1) throw std::invalid_argument("need at least one start");

  MultistartFit fit;
  double corner_max = 0.0;
  for (const auto& [key, rdm] : ms.entries) {
    (void)key;
    corner_max = std::max(corner_max, std::abs(rdm.entries(3, 3)));
  }
  if (corner_max > ms.tol.zero) {
    fit.applicable = false;
    fit.note = "corner entries reach " + std::to_string(corner_max) +
               "; the vacuum + single-excitation restriction does not apply";
    return fit;
  }

  std::vector<FitResult> results;
  for (int s = 0; s < starts; ++s) {
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(std::uint64_t(s) + 1)));
    std::normal_distribution<double> g(0.0, 1.0);
    cvec z(ms.n + 1);
    for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = cx(g(rng), g(rng));
    z /= z.norm();

    double f = fit_objective(z, ms);
    double step = 0.1;
    int iter = 0;
    bool converged = false;
    for (; iter < max_iters; ++iter) {
      const cvec grad = fit_gradient(z, ms);
      const cvec proj = grad - z * z.dot(grad);  // tangent to the sphere
      const double gnorm = proj.norm();
      if (gnorm < 1e-11) {
        converged = true;
        break;
      }
      bool moved = false;
      while (step > 1e-16) {
        cvec trial = z - step * grad;
        trial /= trial.norm();
        const double ft = fit_objective(trial, ms);
        if (ft <= f - 0.25 * step * gnorm * gnorm) {
          z = std::move(trial);
          f = ft;
          step = std::min(step * 1.3, 1.0);
          moved = true;
          break;
        }
        step /= 2.0;
      }
      if (!moved) {
        converged = gnorm < 1e-7;  // stalled by float granularity
        break;
      }
    }
    FitResult r;
    r.params = gauge_fix_params(std::move(z));
    r.residual = std::sqrt(f);
    r.iterations = iter;
    r.converged = converged;
    results.push_back(std::move(r));
  }

  std::sort(results.begin(), results.end(),
            [](const FitResult& a, const FitResult& b) {
              return a.residual < b.residual;
            });
  for (auto& r : results) {
    bool duplicate = false;
    for (const auto& kept : fit.minimizers)
      if ((kept.params - r.params).cwiseAbs().maxCoeff() < 1e-6) {
        duplicate = true;
        break;
      }
    if (!duplicate) fit.minimizers.push_back(std::move(r));
  }
  return fit;
}

}  // namespace qmarg
