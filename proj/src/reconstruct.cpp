#include "qmarg/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <vector>

namespace qmarg {

namespace {

constexpr const char* kPhaseConvention =
    "largest-modulus coefficient real positive, ties to lowest party";

std::string pair_str(const Pair& p) {
  return "(" + std::to_string(p.first) + "," + std::to_string(p.second) + ")";
}

}  // namespace

double check_marginal_set(const MarginalSet& ms) {
  if (ms.n < 2)
    throw std::invalid_argument("marginal set needs at least two parties");
  if (ms.entries.empty())
    throw std::invalid_argument("marginal set is empty");
  double herm_defect = 0.0;
  for (const auto& [key, rdm] : ms.entries) {
    const auto& [J, K] = key;
    if (J < 1 || K <= J || K > ms.n)
      throw std::invalid_argument("marginal key " + pair_str(key) +
                                  " is not canonical within 1.." +
                                  std::to_string(ms.n));
    if (rdm.parties != std::vector<party_t>{J, K})
      throw std::invalid_argument("marginal " + pair_str(key) +
                                  " carries mismatched party labels");
    if (rdm.ambient_n != ms.n)
      throw std::invalid_argument("marginal " + pair_str(key) +
                                  " carries mismatched ambient size");
    if (rdm.entries.rows() != 4 || rdm.entries.cols() != 4)
      throw std::invalid_argument("marginal " + pair_str(key) +
                                  " is not a 4x4 matrix");
    herm_defect = std::max(
        herm_defect,
        (rdm.entries - rdm.entries.adjoint()).cwiseAbs().maxCoeff());
  }
  return herm_defect;
}

namespace {

ReconstructionReport fail(Verdict v, std::string step, std::string message,
                          std::map<std::string, double> diagnostics) {
  ReconstructionReport r;
  r.verdict = v;
  r.step = std::move(step);
  r.message = std::move(message);
  r.diagnostics = std::move(diagnostics);
  r.phase_convention = kPhaseConvention;
  return r;
}

/// Re-derives every provided marginal from the candidate coefficients and
/// records the residuals. Returns the worst residual.
double verify_against(const WCoefficients& c, const MarginalSet& ms,
                      std::map<Pair, double>& residuals) {
  double worst = 0.0;
  for (const auto& [key, rdm] : ms.entries) {
    const Rdm recomputed = w_bipartite_marginal(c, key.first, key.second);
    const double res = (recomputed.entries - rdm.entries).cwiseAbs().maxCoeff();
    residuals[key] = res;
    worst = std::max(worst, res);
  }
  return worst;
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::UniqueW: return "unique_w";
    case Verdict::Inconsistent: return "inconsistent";
    case Verdict::Insufficient: return "insufficient";
  }
  return "unknown";
}

WFormCheck check_w_form(const Rdm& m, const Tolerances& tol) {
  if (m.entries.rows() != 4 || m.entries.cols() != 4)
    throw std::invalid_argument("check_w_form expects a 4x4 marginal");
  const cmat& e = m.entries;
  WFormCheck c;
  c.corner = std::abs(e(3, 3));
  c.zeros = std::max({std::abs(e(0, 1)), std::abs(e(0, 2)), std::abs(e(0, 3)),
                      std::abs(e(1, 3)), std::abs(e(2, 3))});
  c.diagonal = std::abs(e(0, 0) - (1.0 - e(1, 1) - e(2, 2)));
  c.cs_excess = std::max(
      0.0, std::norm(e(1, 2)) - e(1, 1).real() * e(2, 2).real());
  c.pass = c.corner <= tol.zero && c.zeros <= tol.zero &&
           c.diagonal <= tol.consistency && c.cs_excess <= tol.zero;
  return c;
}

GramFactorResult gram_rank1_factor(const PartialGram& g,
                                   const Tolerances& tol) {
  GramFactorResult out;
  if (g.n < 1 || g.diag.size() != g.n)
    throw std::invalid_argument("partial Gram matrix needs a full diagonal");
  for (const auto& [key, v] : g.off) {
    (void)v;
    if (key.first < 1 || key.second <= key.first || key.second > g.n)
      throw std::invalid_argument("pattern key " + pair_str(key) +
                                  " is not canonical within 1.." +
                                  std::to_string(g.n));
  }

  rvec moduli(g.n);
  for (int j = 0; j < g.n; ++j) {
    const double d = g.diag(j);
    if (d < -tol.zero) {
      out.defect = "diagonal entry " + std::to_string(j + 1) +
                   " is negative (" + std::to_string(d) + ")";
      return out;
    }
    moduli(j) = std::sqrt(std::max(d, 0.0));
  }

  // Modulus consistency of every known entry.
  for (const auto& [key, v] : g.off) {
    const double want = moduli(key.first - 1) * moduli(key.second - 1);
    const double defect = std::abs(std::abs(v) - want);
    out.modulus_defect_max = std::max(out.modulus_defect_max, defect);
    if (defect > tol.consistency) {
      out.defect = "modulus inconsistency at " + pair_str(key) + ": |entry| " +
                   std::to_string(std::abs(v)) + " vs " + std::to_string(want);
      return out;
    }
  }

  // Phase propagation over the support (positive-diagonal parties) along a
  // spanning tree of the usable pattern edges.
  std::vector<party_t> support;
  for (int j = 0; j < g.n; ++j)
    if (g.diag(j) > tol.zero) support.push_back(j + 1);

  cvec c = cvec::Zero(g.n);
  if (!support.empty()) {
    std::vector<std::vector<std::pair<party_t, cx>>> adj(
        static_cast<std::size_t>(g.n) + 1);
    for (const auto& [key, v] : g.off) {
      if (std::abs(v) <= tol.zero) continue;  // carries no usable phase
      // off holds c_K * conj(c_J): arg(c_K) = arg(v) + arg(c_J).
      adj[static_cast<std::size_t>(key.first)].push_back({key.second, v});
      adj[static_cast<std::size_t>(key.second)].push_back(
          {key.first, std::conj(v)});
    }
    party_t anchor = support.front();
    for (party_t p : support)
      if (g.diag(p - 1) > g.diag(anchor - 1)) anchor = p;

    std::vector<double> phase(static_cast<std::size_t>(g.n) + 1, 0.0);
    std::vector<char> seen(static_cast<std::size_t>(g.n) + 1, 0);
    std::deque<party_t> queue{anchor};
    seen[static_cast<std::size_t>(anchor)] = 1;
    std::size_t reached = 1;
    while (!queue.empty()) {
      const party_t j = queue.front();
      queue.pop_front();
      for (const auto& [k, v] : adj[static_cast<std::size_t>(j)]) {
        if (seen[static_cast<std::size_t>(k)]) continue;
        seen[static_cast<std::size_t>(k)] = 1;
        phase[static_cast<std::size_t>(k)] =
            phase[static_cast<std::size_t>(j)] + std::arg(v);
        queue.push_back(k);
        ++reached;
      }
    }
    std::size_t in_support_reached = 0;
    for (party_t p : support)
      if (seen[static_cast<std::size_t>(p)]) ++in_support_reached;
    if (in_support_reached != support.size()) {
      out.defect = "phase indeterminate across components: only " +
                   std::to_string(in_support_reached) + " of " +
                   std::to_string(support.size()) +
                   " positive-diagonal parties are phase-connected";
      return out;
    }
    (void)reached;
    for (party_t p : support)
      c(p - 1) = std::polar(moduli(p - 1), phase[static_cast<std::size_t>(p)]);
  }

  // Cycle consistency: every known entry must now be reproduced.
  for (const auto& [key, v] : g.off) {
    const cx want = c(key.second - 1) * std::conj(c(key.first - 1));
    out.cycle_defect_max = std::max(out.cycle_defect_max, std::abs(v - want));
  }
  if (out.cycle_defect_max > tol.consistency) {
    out.defect = "cycle inconsistency: worst defect " +
                 std::to_string(out.cycle_defect_max);
    return out;
  }

  out.ok = true;
  out.c = std::move(c);
  return out;
}

ReconstructionReport reconstruct_mixed(const MarginalSet& ms) {
  const Tolerances& tol = ms.tol;
  std::map<std::string, double> diag;
  diag["hermiticity_defect_max"] = check_marginal_set(ms);
  const int n = ms.n;

  // Step 1: the doubly-excited corner of every provided marginal vanishes.
  double corner_max = 0.0;
  double template_zero_max = 0.0;
  const Pair* worst_pair = nullptr;
  for (const auto& [key, rdm] : ms.entries) {
    const WFormCheck wf = check_w_form(rdm, tol);
    template_zero_max = std::max(template_zero_max, wf.zeros);
    if (wf.corner > corner_max) {
      corner_max = wf.corner;
      worst_pair = &key;
    }
  }
  diag["corner_max"] = corner_max;
  diag["template_zero_max"] = template_zero_max;
  if (corner_max > tol.zero)
    return fail(Verdict::Inconsistent, "step1:corner",
                "marginal " + pair_str(*worst_pair) + " has |entry(3,3)| = " +
                    std::to_string(corner_max) +
                    ", incompatible with any W-class state",
                std::move(diag));

  // Step 2: certifying that every global diagonal with two or more
  // excitations vanishes takes the corner of every pair; demand full
  // coverage.
  const std::size_t expected =
      static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2;
  if (ms.entries.size() != expected) {
    std::ostringstream missing;
    int listed = 0;
    for (party_t J = 1; J <= n && listed < 4; ++J)
      for (party_t K = J + 1; K <= n && listed < 4; ++K)
        if (!ms.entries.count({J, K})) {
          missing << (listed ? ", " : "") << pair_str({J, K});
          ++listed;
        }
    return fail(Verdict::Insufficient, "step2:coverage",
                "diagonal support not certified: " +
                    std::to_string(ms.entries.size()) + " of " +
                    std::to_string(expected) + " pair marginals present" +
                    (listed ? " (missing " + missing.str() + ", ...)" : ""),
                std::move(diag));
  }

  // Step 3: per-party moduli. Party J's |c_J|^2 shows up at entry(2,2) of
  // rho^{JK} and at entry(1,1) of rho^{IJ}; collect all n-1 readings.
  rvec sum(n), mn(n), mx(n);
  sum.setZero();
  mn.setConstant(2.0);
  mx.setConstant(-1.0);
  auto record = [&](party_t J, double value) {
    sum(J - 1) += value;
    mn(J - 1) = std::min(mn(J - 1), value);
    mx(J - 1) = std::max(mx(J - 1), value);
  };
  for (const auto& [key, rdm] : ms.entries) {
    record(key.first, rdm.entries(2, 2).real());
    record(key.second, rdm.entries(1, 1).real());
  }
  double spread_max = 0.0;
  party_t spread_party = 1;
  for (int j = 0; j < n; ++j)
    if (mx(j) - mn(j) > spread_max) {
      spread_max = mx(j) - mn(j);
      spread_party = j + 1;
    }
  diag["moduli_spread_max"] = spread_max;
  if (spread_max > tol.consistency)
    return fail(Verdict::Inconsistent, "step3:moduli",
                "|c_" + std::to_string(spread_party) +
                    "|^2 readings disagree across marginals by " +
                    std::to_string(spread_max),
                std::move(diag));
  rvec d = sum / double(n - 1);
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    if (d(j) < -tol.zero)
      return fail(Verdict::Inconsistent, "step3:moduli",
                  "extracted |c_" + std::to_string(j + 1) + "|^2 = " +
                      std::to_string(d(j)) + " is negative",
                  std::move(diag));
    d(j) = std::max(d(j), 0.0);
    total += d(j);
  }
  diag["moduli_sum"] = total;
  if (std::abs(total - 1.0) > tol.consistency)
    return fail(Verdict::Inconsistent, "step3:normalization",
                "sum of extracted |c_J|^2 is " + std::to_string(total) +
                    "; the vacuum diagonal cannot vanish",
                std::move(diag));
  d /= total;  // exact normalization once graded consistent

  // Steps 4-5: partial Gram matrix from the entry(1,2) phases, then the
  // rank-1 factorization that correlates all parties.
  PartialGram gram;
  gram.n = n;
  gram.diag = d;
  for (const auto& [key, rdm] : ms.entries)
    gram.off[key] = rdm.entries(1, 2);
  const GramFactorResult factor = gram_rank1_factor(gram, tol);
  diag["gram_modulus_defect_max"] = factor.modulus_defect_max;
  diag["gram_cycle_defect_max"] = factor.cycle_defect_max;
  if (!factor.ok)
    return fail(Verdict::Inconsistent, "step5:gram",
                "pairwise products admit no rank-1 factorization: " +
                    factor.defect,
                std::move(diag));

  ReconstructionReport report;
  report.coefficients = fix_gauge(WCoefficients{n, factor.c});
  report.phase_convention = kPhaseConvention;
  report.diagnostics = std::move(diag);

  // Step 6: mandatory verification by recompute.
  const double worst =
      verify_against(report.coefficients, ms, report.residuals);
  report.diagnostics["verification_residual_max"] = worst;
  if (worst > tol.consistency) {
    report.verdict = Verdict::Inconsistent;
    report.step = "step6:verification";
    report.message = "re-derived marginals deviate from the input by " +
                     std::to_string(worst);
    return report;
  }
  report.verdict = Verdict::UniqueW;
  report.step = "step6:verification";
  report.message =
      "all " + std::to_string(expected) +
      " pair marginals re-derived within tolerance; unique among all "
      "global states with these marginals";
  return report;
}

ReconstructionReport reconstruct_pure(const MarginalSet& star) {
  const Tolerances& tol = star.tol;
  std::map<std::string, double> diag;
  diag["hermiticity_defect_max"] = check_marginal_set(star);
  const int n = star.n;

  // The star set must be exactly { (1,K) : K = 2..n }.
  if (star.entries.size() != static_cast<std::size_t>(n - 1) ||
      star.entries.begin()->first.first != 1 ||
      star.entries.rbegin()->first != Pair{1, n}) {
    for (party_t K = 2; K <= n; ++K)
      if (!star.entries.count({1, K}))
        return fail(Verdict::Insufficient, "star:coverage",
                    "pure-state reconstruction needs exactly the marginals "
                    "(1,K) for K = 2.." +
                        std::to_string(n) + "; missing " + pair_str({1, K}),
                    std::move(diag));
    return fail(Verdict::Insufficient, "star:coverage",
                "pure-state reconstruction needs exactly the marginals (1,K) "
                "for K = 2.." +
                    std::to_string(n) + "; extra pairs present",
                std::move(diag));
  }

  // Step 1: corners vanish.
  double corner_max = 0.0;
  const Pair* worst_pair = nullptr;
  for (const auto& [key, rdm] : star.entries) {
    const double corner = std::abs(rdm.entries(3, 3));
    if (corner > corner_max) {
      corner_max = corner;
      worst_pair = &key;
    }
  }
  diag["corner_max"] = corner_max;
  if (corner_max > tol.zero)
    return fail(Verdict::Inconsistent, "step1:corner",
                "marginal " + pair_str(*worst_pair) + " has |entry(3,3)| = " +
                    std::to_string(corner_max) +
                    ", incompatible with any W-class state",
                std::move(diag));

  // Step 2: every star marginal reads |c_1|^2 at entry(2,2).
  double hub_min = 2.0, hub_max = -1.0, hub_sum = 0.0;
  for (const auto& [key, rdm] : star.entries) {
    (void)key;
    const double v = rdm.entries(2, 2).real();
    hub_min = std::min(hub_min, v);
    hub_max = std::max(hub_max, v);
    hub_sum += v;
  }
  diag["hub_spread"] = hub_max - hub_min;
  if (hub_max - hub_min > tol.consistency)
    return fail(Verdict::Inconsistent, "step2:hub",
                "|c_1|^2 readings disagree across the star by " +
                    std::to_string(hub_max - hub_min),
                std::move(diag));
  const double d1 = std::max(hub_sum / double(n - 1), 0.0);
  diag["hub_modulus_sq"] = d1;
  if (d1 <= tol.zero)
    return fail(Verdict::Insufficient, "step2:hub",
                "hub coefficient vanishes; the phase chain through party 1 "
                "breaks and the star marginals no longer pin the global "
                "phases",
                std::move(diag));

  // Step 3: with the hub phase gauged to zero, each entry(1,2) of rho^{1K}
  // equals c_K * conj(c_1) and divides out to c_K.
  const double c1 = std::sqrt(d1);
  cvec c(n);
  c(0) = c1;
  for (const auto& [key, rdm] : star.entries)
    c(key.second - 1) = rdm.entries(1, 2) / c1;

  // Step 4: entry(1,1) must agree with the recovered |c_K|^2; this is what
  // kills every cross term left free by purity.
  double cross_max = 0.0;
  party_t cross_party = 2;
  for (const auto& [key, rdm] : star.entries) {
    const double defect =
        std::abs(rdm.entries(1, 1).real() - std::norm(c(key.second - 1)));
    if (defect > cross_max) {
      cross_max = defect;
      cross_party = key.second;
    }
  }
  diag["cross_defect_max"] = cross_max;
  if (cross_max > tol.consistency)
    return fail(Verdict::Inconsistent, "step4:cross",
                "entry(1,1) of marginal (1," + std::to_string(cross_party) +
                    ") deviates from the recovered |c_" +
                    std::to_string(cross_party) + "|^2 by " +
                    std::to_string(cross_max),
                std::move(diag));

  // Step 5: normalization forces the vacuum amplitude to zero.
  const double total = c.squaredNorm();
  diag["moduli_sum"] = total;
  if (std::abs(total - 1.0) > tol.consistency)
    return fail(Verdict::Inconsistent, "step5:normalization",
                "recovered |c_J|^2 sum to " + std::to_string(total) +
                    "; a pure global state would keep vacuum weight",
                std::move(diag));
  c /= std::sqrt(total);

  ReconstructionReport report;
  report.purity_assumed = true;
  report.coefficients = fix_gauge(WCoefficients{n, std::move(c)});
  report.phase_convention = kPhaseConvention;
  report.diagnostics = std::move(diag);

  const double worst =
      verify_against(report.coefficients, star, report.residuals);
  report.diagnostics["verification_residual_max"] = worst;
  if (worst > tol.consistency) {
    report.verdict = Verdict::Inconsistent;
    report.step = "step6:verification";
    report.message = "re-derived marginals deviate from the input by " +
                     std::to_string(worst);
    return report;
  }
  report.verdict = Verdict::UniqueW;
  report.step = "step6:verification";
  report.message = "all " + std::to_string(n - 1) +
                   " star marginals re-derived within tolerance; unique "
                   "among pure global states with these marginals";
  return report;
}

WCoefficients fix_gauge(const WCoefficients& c) {
  validate_w_coefficients(c);
  int best = 0;
  for (int j = 1; j < c.n; ++j)
    if (std::abs(c.c(j)) > std::abs(c.c(best))) best = j;
  const cx top = c.c(best);
  WCoefficients out{c.n, c.c};
  if (std::abs(top) > 0.0) out.c *= std::conj(top) / std::abs(top);
  // Scrub the residual imaginary dust on the anchor so the convention is
  // exact, not merely approximate.
  out.c(best) = std::abs(out.c(best));
  return out;
}

}  // namespace qmarg
