// Command-line front end: computes pair marginals of a state file,
// reconstructs W-class coefficients from a marginal file, gathers uniqueness
// evidence, emits phase-twist counterexamples, and runs the multi-start pure
// fit. All input and output is JSON; "-" means stdin or stdout. Exit codes:
// 0 success, 2 malformed input, 3 resource cap, 4 inconsistent marginals,
// 5 insufficient marginals.

#include <cctype>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qmarg/io.hpp"
#include "qmarg/oracle.hpp"
#include "qmarg/ptrace.hpp"
#include "qmarg/reconstruct.hpp"
#include "qmarg/states.hpp"

namespace {

using namespace qmarg;

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string current;
  for (char ch : text) {
    if (ch == sep) {
      out.push_back(current);
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  out.push_back(current);
  return out;
}

int parse_int(const std::string& token, const std::string& what) {
  try {
    std::size_t used = 0;
    const int value = std::stoi(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return value;
  } catch (const std::exception&) {
    throw ParseError(what + ": \"" + token + "\" is not an integer");
  }
}

double parse_double(const std::string& token, const std::string& what) {
  try {
    std::size_t used = 0;
    const double value = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return value;
  } catch (const std::exception&) {
    throw ParseError(what + ": \"" + token + "\" is not a number");
  }
}

/// "1,2,3" -> {1,2,3}; must be strictly increasing party labels.
std::vector<party_t> parse_subset(const std::string& spec) {
  std::vector<party_t> out;
  for (const std::string& token : split(spec, ','))
    out.push_back(parse_int(token, "subset"));
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i] <= out[i - 1])
      throw ParseError("subset \"" + spec +
                       "\" must list parties in strictly increasing order");
  if (out.empty()) throw ParseError("empty subset");
  return out;
}

std::set<Pair> all_pairs(int n) {
  std::set<Pair> out;
  for (party_t j = 1; j <= n; ++j)
    for (party_t k = j + 1; k <= n; ++k) out.insert({j, k});
  return out;
}

/// "all", "12,34" (single-digit parties), or "1-2,3-4".
std::set<Pair> parse_pairs(const std::string& spec, int n) {
  if (spec == "all") return all_pairs(n);
  std::set<Pair> out;
  for (const std::string& token : split(spec, ',')) {
    party_t J = 0;
    party_t K = 0;
    if (token.find('-') != std::string::npos) {
      const auto parts = split(token, '-');
      if (parts.size() != 2)
        throw ParseError("pair \"" + token + "\" must look like J-K");
      J = parse_int(parts[0], "pair");
      K = parse_int(parts[1], "pair");
    } else if (token.size() == 2 && std::isdigit(unsigned(token[0])) &&
               std::isdigit(unsigned(token[1]))) {
      J = token[0] - '0';
      K = token[1] - '0';
    } else {
      throw ParseError("pair \"" + token +
                       "\" must be two digits (\"12\") or J-K (\"1-2\")");
    }
    if (J < 1 || K <= J || K > n)
      throw ParseError("pair (" + std::to_string(J) + "," + std::to_string(K) +
                       ") is not canonical within 1.." + std::to_string(n));
    out.insert({J, K});
  }
  if (out.empty()) throw ParseError("empty pair list");
  return out;
}

/// "12|34" or "1,2|3,4" -> {{1,2},{3,4}}.
std::vector<std::vector<party_t>> parse_blocks(const std::string& spec) {
  std::vector<std::vector<party_t>> out;
  for (const std::string& token : split(spec, '|')) {
    std::vector<party_t> block;
    if (token.find(',') != std::string::npos) {
      for (const std::string& part : split(token, ','))
        block.push_back(parse_int(part, "block"));
    } else {
      for (char ch : token) {
        if (!std::isdigit(unsigned(ch)))
          throw ParseError("block \"" + token + "\" must list digit parties");
        block.push_back(ch - '0');
      }
    }
    if (block.empty()) throw ParseError("empty block in \"" + spec + "\"");
    out.push_back(std::move(block));
  }
  return out;
}

std::vector<double> parse_phases(const std::string& spec) {
  std::vector<double> out;
  for (const std::string& token : split(spec, ','))
    out.push_back(parse_double(token, "phase"));
  return out;
}

int state_n(const io::StateVariant& state) {
  return std::holds_alternative<PureState>(state)
             ? std::get<PureState>(state).n
             : std::get<WCoefficients>(state).n;
}

int cmd_marginals(const std::string& input,
                  const std::vector<std::string>& subset_specs,
                  const std::string& out, const Tolerances& tol) {
  const io::StateVariant state = io::load_state(io::read_text(input), tol);
  const int n = state_n(state);

  std::vector<std::vector<party_t>> subsets;
  for (const std::string& spec : subset_specs)
    subsets.push_back(parse_subset(spec));
  if (subsets.empty())
    for (const auto& [J, K] : all_pairs(n)) subsets.push_back({J, K});

  bool pairs_only = true;
  for (const auto& subset : subsets) pairs_only &= subset.size() == 2;

  if (pairs_only) {
    MarginalSet ms;
    ms.n = n;
    ms.tol = tol;
    for (const auto& subset : subsets) {
      const party_t J = subset[0];
      const party_t K = subset[1];
      const Rdm rdm = std::holds_alternative<WCoefficients>(state)
                          ? w_bipartite_marginal(
                                std::get<WCoefficients>(state), J, K)
                          : rdm_from_pure(std::get<PureState>(state), subset);
      ms.entries.insert_or_assign(Pair{J, K}, rdm);
    }
    io::write_text(out, io::serialize_marginals(ms));
    return 0;
  }

  // General subsets need dense amplitudes even for W inputs.
  const PureState psi = std::holds_alternative<PureState>(state)
                            ? std::get<PureState>(state)
                            : make_w(std::get<WCoefficients>(state));
  std::vector<Rdm> rdms;
  for (const auto& subset : subsets) rdms.push_back(rdm_from_pure(psi, subset));
  io::write_text(out, io::serialize_subset_rdms(n, rdms));
  return 0;
}

int cmd_reconstruct(const std::string& input, const std::string& mode,
                    const std::string& out, const Tolerances& tol) {
  const io::LoadedMarginals loaded = io::load_marginals(io::read_text(input), tol);
  ReconstructionReport report = mode == "pure-star"
                                    ? reconstruct_pure(loaded.set)
                                    : reconstruct_mixed(loaded.set);
  report.diagnostics["input_hermiticity_defect"] = loaded.hermiticity_defect;
  io::write_text(out, io::serialize_report(report));
  switch (report.verdict) {
    case Verdict::UniqueW:
      return 0;
    case Verdict::Inconsistent:
      return 4;
    case Verdict::Insufficient:
      return 5;
  }
  return 2;
}

int cmd_verify_unique(const std::string& input, const std::string& pairs_spec,
                      std::size_t samples, std::uint64_t seed,
                      const std::string& out, const Tolerances& tol) {
  const WCoefficients c = io::load_w_coefficients(io::read_text(input), tol);
  const std::set<Pair> pairs = parse_pairs(pairs_spec, c.n);
  const UniquenessEvidence ev = uniqueness_evidence(c, pairs, samples, seed, tol);
  io::write_text(out, io::serialize_evidence(ev));
  return 0;
}

int cmd_counterexample(const std::string& input, const std::string& blocks_spec,
                       const std::string& phases_spec, const std::string& out,
                       const Tolerances& tol) {
  const WCoefficients c = io::load_w_coefficients(io::read_text(input), tol);
  const PureState twisted =
      phase_twist(c, parse_blocks(blocks_spec), parse_phases(phases_spec));
  std::map<Pair, double> residuals;
  for (const auto& [J, K] : all_pairs(c.n)) {
    const std::vector<party_t> parties{J, K};
    residuals[{J, K}] = marginal_residual(rdm_from_pure(twisted, parties),
                                          w_bipartite_marginal(c, J, K));
  }
  io::write_text(out, io::serialize_counterexample(twisted, residuals));
  return 0;
}

int cmd_fit(const std::string& input, int starts, std::uint64_t seed,
            const std::string& out, const Tolerances& tol) {
  const io::LoadedMarginals loaded = io::load_marginals(io::read_text(input), tol);
  const MultistartFit fit = multistart_pure_fit(loaded.set, starts, seed);
  io::write_text(out, io::serialize_fit(fit));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Pair marginals of N-qubit states, W-class reconstruction from "
      "bipartite marginals, and numerical uniqueness evidence"};
  app.require_subcommand(1);

  Tolerances tol;
  std::string input;
  std::string out = "-";
  std::vector<std::string> subset_specs;
  std::string mode = "mixed";
  std::string pairs_spec = "all";
  std::string blocks_spec;
  std::string phases_spec;
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  int starts = 16;

  CLI::App* marginals = app.add_subcommand(
      "marginals", "Reduced density matrices of a state file");
  marginals->add_option("input", input, "state file (\"-\" for stdin)")
      ->required();
  marginals->add_option("--subset", subset_specs,
                        "comma-separated parties, repeatable; default: all pairs");
  marginals->add_option("--out", out, "output path (\"-\" for stdout)");

  CLI::App* reconstruct = app.add_subcommand(
      "reconstruct", "Recover W-class coefficients from pair marginals");
  reconstruct->add_option("input", input, "marginal file (\"-\" for stdin)")
      ->required();
  reconstruct->add_option("--mode", mode, "mixed (default) or pure-star")
      ->check(CLI::IsMember({"mixed", "pure-star"}));
  reconstruct->add_option("--tol-zero", tol.zero, "must-vanish entry tolerance");
  reconstruct->add_option("--tol-consistency", tol.consistency,
                          "cross-marginal agreement tolerance");
  reconstruct->add_option("--out", out, "output path (\"-\" for stdout)");

  CLI::App* verify = app.add_subcommand(
      "verify-unique", "First-order feasibility evidence around a W state");
  verify->add_option("input", input, "W coefficient file (\"-\" for stdin)")
      ->required();
  verify->add_option("--pairs", pairs_spec,
                     "\"all\", \"12,34\", or \"1-2,3-4\"");
  verify->add_option("--samples", samples, "random kernel directions to test");
  verify->add_option("--seed", seed, "RNG seed");
  verify->add_option("--out", out, "output path (\"-\" for stdout)");

  CLI::App* counter = app.add_subcommand(
      "counterexample", "Phase-twisted state sharing all in-block marginals");
  counter->add_option("input", input, "W coefficient file (\"-\" for stdin)")
      ->required();
  counter->add_option("--blocks", blocks_spec, "party partition, e.g. \"12|34\"")
      ->required();
  counter->add_option("--phases", phases_spec, "one angle per block, e.g. \"0.7,1.9\"")
      ->required();
  counter->add_option("--out", out, "output path (\"-\" for stdout)");

  CLI::App* fit = app.add_subcommand(
      "fit", "Multi-start pure fit over the vacuum + single-excitation span");
  fit->add_option("input", input, "marginal file (\"-\" for stdin)")
      ->required();
  fit->add_option("--starts", starts, "number of random starts")
      ->check(CLI::PositiveNumber);
  fit->add_option("--seed", seed, "RNG seed");
  fit->add_option("--out", out, "output path (\"-\" for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(marginals))
      return cmd_marginals(input, subset_specs, out, tol);
    if (app.got_subcommand(reconstruct))
      return cmd_reconstruct(input, mode, out, tol);
    if (app.got_subcommand(verify))
      return cmd_verify_unique(input, pairs_spec, samples, seed, out, tol);
    if (app.got_subcommand(counter))
      return cmd_counterexample(input, blocks_spec, phases_spec, out, tol);
    if (app.got_subcommand(fit)) return cmd_fit(input, starts, seed, out, tol);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const CapExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
