#include "qmarg/io.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

namespace qmarg::io {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string pair_key(const Pair& p) {
  return std::to_string(p.first) + "," + std::to_string(p.second);
}

ordered_json cx_json(const cx& z) {
  return ordered_json::array({z.real(), z.imag()});
}

ordered_json cvec_json(const cvec& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(cx_json(v(i)));
  return out;
}

ordered_json cmat_json(const cmat& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(cx_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

[[noreturn]] void bad(const std::string& what) { throw ParseError(what); }

ordered_json parse(const std::string& text) {
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    bad(std::string("invalid JSON: ") + e.what());
  }
}

const ordered_json& field(const ordered_json& j, const char* key) {
  if (!j.is_object()) bad("expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) bad(std::string("missing field \"") + key + "\"");
  return *it;
}

int int_field(const ordered_json& j, const char* key) {
  const ordered_json& v = field(j, key);
  if (!v.is_number_integer())
    bad(std::string("field \"") + key + "\" must be an integer");
  return v.get<int>();
}

cx cx_from(const ordered_json& j, const char* where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    bad(std::string(where) + ": a complex number is a [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

cvec cvec_from(const ordered_json& j, Eigen::Index want, const char* where) {
  if (!j.is_array())
    bad(std::string(where) + ": expected an array of [re, im] pairs");
  if (Eigen::Index(j.size()) != want)
    bad(std::string(where) + ": expected " + std::to_string(want) +
        " entries, got " + std::to_string(j.size()));
  cvec out(want);
  for (Eigen::Index i = 0; i < want; ++i) out(i) = cx_from(j[i], where);
  return out;
}

cmat cmat_from(const ordered_json& j, Eigen::Index dim, const char* where) {
  if (!j.is_array() || Eigen::Index(j.size()) != dim)
    bad(std::string(where) + ": expected a " + std::to_string(dim) + "x" +
        std::to_string(dim) + " matrix");
  cmat out(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const ordered_json& row = j[i];
    if (!row.is_array() || Eigen::Index(row.size()) != dim)
      bad(std::string(where) + ": expected a " + std::to_string(dim) + "x" +
          std::to_string(dim) + " matrix");
    for (Eigen::Index k = 0; k < dim; ++k) out(i, k) = cx_from(row[k], where);
  }
  return out;
}

}  // namespace

std::string serialize_pure_state(const PureState& psi) {
  ordered_json j;
  j["n"] = psi.n;
  j["kind"] = "pure";
  j["amplitudes"] = cvec_json(psi.amplitudes);
  return dump(j);
}

std::string serialize_w_coefficients(const WCoefficients& c) {
  ordered_json j;
  j["n"] = c.n;
  j["kind"] = "w";
  j["c"] = cvec_json(c.c);
  return dump(j);
}

std::string serialize_marginals(const MarginalSet& ms) {
  ordered_json j;
  j["n"] = ms.n;
  ordered_json pairs = ordered_json::array();
  for (const auto& [key, rdm] : ms.entries) {
    ordered_json entry;
    entry["parties"] = ordered_json::array({key.first, key.second});
    entry["matrix"] = cmat_json(rdm.entries);
    pairs.push_back(std::move(entry));
  }
  j["pairs"] = std::move(pairs);
  return dump(j);
}

std::string serialize_subset_rdms(int n, const std::vector<Rdm>& rdms) {
  ordered_json j;
  j["n"] = n;
  ordered_json subsets = ordered_json::array();
  for (const Rdm& rdm : rdms) {
    ordered_json entry;
    entry["parties"] = rdm.parties;
    entry["matrix"] = cmat_json(rdm.entries);
    subsets.push_back(std::move(entry));
  }
  j["subsets"] = std::move(subsets);
  return dump(j);
}

std::string serialize_report(const ReconstructionReport& report) {
  ordered_json j;
  j["verdict"] = to_string(report.verdict);
  j["step"] = report.step;
  j["message"] = report.message;
  j["phase_convention"] = report.phase_convention;
  j["coefficients"] = report.verdict == Verdict::UniqueW
                          ? cvec_json(report.coefficients.c)
                          : ordered_json::array();
  ordered_json residuals;
  for (const auto& [key, value] : report.residuals) residuals[pair_key(key)] = value;
  j["residuals"] = std::move(residuals);
  ordered_json diagnostics;
  for (const auto& [key, value] : report.diagnostics) diagnostics[key] = value;
  j["diagnostics"] = std::move(diagnostics);
  ordered_json assumptions = ordered_json::array();
  if (report.purity_assumed)
    assumptions.push_back(
        "global state is pure (caller-asserted; n-1 star marginals cannot "
        "certify purity)");
  j["assumptions"] = std::move(assumptions);
  return dump(j);
}

std::string serialize_evidence(const UniquenessEvidence& ev) {
  ordered_json j;
  j["n"] = ev.n;
  j["seed"] = ev.seed;
  j["samples"] = ev.samples;
  j["nullspace_dim"] = ev.nullspace_dim;
  j["probes_tested"] = ev.probes_tested;
  j["raw_feasible"] = ev.raw_feasible;
  j["probe_feasible"] = ev.probe_feasible;
  j["feasible_count"] = ev.feasible_count;
  j["best_closeness"] = ev.best_closeness;
  return dump(j);
}

std::string serialize_fit(const MultistartFit& fit) {
  ordered_json j;
  j["applicable"] = fit.applicable;
  j["note"] = fit.note;
  ordered_json mins = ordered_json::array();
  for (const FitResult& m : fit.minimizers) {
    ordered_json entry;
    entry["params"] = cvec_json(m.params);
    entry["residual"] = m.residual;
    entry["iterations"] = m.iterations;
    entry["converged"] = m.converged;
    mins.push_back(std::move(entry));
  }
  j["minimizers"] = std::move(mins);
  return dump(j);
}

std::string serialize_counterexample(const PureState& twisted,
                                     const std::map<Pair, double>& residuals) {
  ordered_json j;
  j["n"] = twisted.n;
  j["kind"] = "pure";
  j["amplitudes"] = cvec_json(twisted.amplitudes);
  ordered_json table;
  for (const auto& [key, value] : residuals) table[pair_key(key)] = value;
  j["residuals"] = std::move(table);
  return dump(j);
}

StateVariant load_state(const std::string& text, const Tolerances& tol) {
  const ordered_json j = parse(text);
  const int n = int_field(j, "n");
  if (n < 1) bad("\"n\" must be positive");
  const ordered_json& kind = field(j, "kind");
  if (!kind.is_string()) bad("field \"kind\" must be a string");
  const std::string k = kind.get<std::string>();
  try {
    if (k == "pure") {
      if (n > kDenseVectorCap)
        throw CapExceeded("pure-state files are capped at n = " +
                          std::to_string(kDenseVectorCap) + ", got n = " +
                          std::to_string(n));
      cvec amps = cvec_from(field(j, "amplitudes"), Eigen::Index(1) << n,
                            "amplitudes");
      return make_pure_state(n, std::move(amps), tol);
    }
    if (k == "w") {
      cvec c = cvec_from(field(j, "c"), n, "c");
      return make_w_coefficients(std::move(c), tol);
    }
  } catch (const std::invalid_argument& e) {
    bad(std::string("invalid state: ") + e.what());
  }
  bad("\"kind\" must be \"pure\" or \"w\"");
}

WCoefficients load_w_coefficients(const std::string& text,
                                  const Tolerances& tol) {
  StateVariant state = load_state(text, tol);
  if (!std::holds_alternative<WCoefficients>(state))
    bad("expected a W coefficient file (kind == \"w\")");
  return std::get<WCoefficients>(std::move(state));
}

LoadedMarginals load_marginals(const std::string& text, const Tolerances& tol) {
  const ordered_json j = parse(text);
  LoadedMarginals out;
  out.set.n = int_field(j, "n");
  out.set.tol = tol;
  if (out.set.n < 2) bad("\"n\" must be at least 2 for pair marginals");
  const ordered_json& pairs = field(j, "pairs");
  if (!pairs.is_array()) bad("field \"pairs\" must be an array");
  for (const ordered_json& entry : pairs) {
    const ordered_json& parties = field(entry, "parties");
    if (!parties.is_array() || parties.size() != 2 ||
        !parties[0].is_number_integer() || !parties[1].is_number_integer())
      bad("\"parties\" must be a pair [J, K] of integers");
    const party_t J = parties[0].get<party_t>();
    const party_t K = parties[1].get<party_t>();
    if (J < 1 || K <= J || K > out.set.n)
      bad("pair (" + std::to_string(J) + "," + std::to_string(K) +
          ") is not canonical within 1.." + std::to_string(out.set.n));
    cmat m = cmat_from(field(entry, "matrix"), 4, "matrix");
    const double defect = (m - m.adjoint().eval()).cwiseAbs().maxCoeff();
    out.hermiticity_defect = std::max(out.hermiticity_defect, defect);
    Rdm rdm;
    rdm.parties = {J, K};
    rdm.ambient_n = out.set.n;
    rdm.entries = (m + m.adjoint().eval()) / 2.0;
    if (!out.set.entries.emplace(Pair{J, K}, std::move(rdm)).second)
      bad("duplicate pair (" + std::to_string(J) + "," + std::to_string(K) +
          ")");
  }
  return out;
}

std::string read_text(const std::string& path) {
  if (path == "-") {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    return buf.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) bad("cannot open \"" + path + "\" for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream outf(path, std::ios::binary);
  if (!outf) bad("cannot open \"" + path + "\" for writing");
  outf << text;
}

}  // namespace qmarg::io
