#pragma once

// JSON file formats shared by the command-line tool and the test harness.
// Four document kinds: states (pure amplitudes or W coefficients), pair
// marginal sets, reconstruction reports, and oracle outputs. Serialized
// numbers use the shortest decimal form that reparses to the same double, so
// every emitted file round-trips exactly and identical inputs produce
// byte-identical output.

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "qmarg/oracle.hpp"
#include "qmarg/reconstruct.hpp"
#include "qmarg/states.hpp"
#include "qmarg/types.hpp"

namespace qmarg::io {

/// {"n": .., "kind": "pure", "amplitudes": [[re,im] x 2^n]}
std::string serialize_pure_state(const PureState& psi);

/// {"n": .., "kind": "w", "c": [[re,im] x n]}
std::string serialize_w_coefficients(const WCoefficients& c);

/// {"n": .., "pairs": [{"parties": [J,K], "matrix": [[[re,im] x4] x4]}]}
/// in ascending pair order; rows/columns ordered |00>,|01>,|10>,|11>.
std::string serialize_marginals(const MarginalSet& ms);

/// {"n": .., "subsets": [{"parties": [...], "matrix": square}]} for reduced
/// density matrices on subsets that are not all pairs.
std::string serialize_subset_rdms(int n, const std::vector<Rdm>& rdms);

std::string serialize_report(const ReconstructionReport& report);
std::string serialize_evidence(const UniquenessEvidence& ev);
std::string serialize_fit(const MultistartFit& fit);

/// The twisted state in the exact pure-state format plus a "residuals" table
/// keyed "J,K" (ignored by load_state, so the file still parses as a state).
std::string serialize_counterexample(const PureState& twisted,
                                     const std::map<Pair, double>& residuals);

/// Either state kind, decided by the "kind" field.
using StateVariant = std::variant<PureState, WCoefficients>;
StateVariant load_state(const std::string& text, const Tolerances& tol = {});

/// As load_state but requires kind == "w".
WCoefficients load_w_coefficients(const std::string& text,
                                  const Tolerances& tol = {});

/// Marginal files are loaded leniently: each matrix is symmetrized to
/// (M + M^dagger)/2 and the worst deviation is reported here instead of
/// rejecting the file, so reconstruction can grade noisy inputs.
struct LoadedMarginals {
  MarginalSet set;
  double hermiticity_defect = 0.0;
};
LoadedMarginals load_marginals(const std::string& text,
                               const Tolerances& tol = {});

/// Whole-file / whole-stream text transport; "-" means stdin or stdout.
std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace qmarg::io
