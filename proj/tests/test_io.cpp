// Serialization round trips, lenient marginal loading, and the failure modes
// of the JSON formats.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>

#include <json.hpp>

#include "qmarg/io.hpp"
#include "qmarg/reconstruct.hpp"
#include "qmarg/states.hpp"

using namespace qmarg;
using nlohmann::json;

namespace {

PureState random_pure(int n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g;
  cvec a(Eigen::Index(1) << n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = cx(g(gen), g(gen));
  a /= a.norm();
  return make_pure_state(n, std::move(a));
}

WCoefficients random_w(int n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g;
  cvec c(n);
  for (int j = 0; j < n; ++j) c(j) = cx(g(gen), g(gen));
  c /= c.norm();
  return make_w_coefficients(std::move(c));
}

MarginalSet w_pair_set(const WCoefficients& c) {
  MarginalSet ms;
  ms.n = c.n;
  for (party_t j = 1; j <= c.n; ++j)
    for (party_t k = j + 1; k <= c.n; ++k)
      ms.entries.emplace(Pair{j, k}, w_bipartite_marginal(c, j, k));
  return ms;
}

}  // namespace

TEST_CASE("pure states round-trip bit exactly") {
  const PureState psi = random_pure(4, 1);
  const std::string text = io::serialize_pure_state(psi);
  const io::StateVariant back = io::load_state(text);
  REQUIRE(std::holds_alternative<PureState>(back));
  const PureState& got = std::get<PureState>(back);
  CHECK(got.n == psi.n);
  CHECK(got.amplitudes == psi.amplitudes);  // exact, not approximate
  // Serialization is deterministic.
  CHECK(io::serialize_pure_state(psi) == text);
}

TEST_CASE("W coefficient files round-trip bit exactly, including huge n") {
  for (int n : {3, 1000}) {
    const WCoefficients c = random_w(n, unsigned(n));
    const io::StateVariant back = io::load_state(io::serialize_w_coefficients(c));
    REQUIRE(std::holds_alternative<WCoefficients>(back));
    CHECK(std::get<WCoefficients>(back).c == c.c);
  }
}

TEST_CASE("marginal sets round-trip bit exactly with zero defect") {
  const MarginalSet ms = w_pair_set(random_w(4, 7));
  const std::string text = io::serialize_marginals(ms);
  const io::LoadedMarginals back = io::load_marginals(text);
  CHECK(back.hermiticity_defect == 0.0);
  CHECK(back.set.n == 4);
  REQUIRE(back.set.entries.size() == ms.entries.size());
  for (const auto& [key, rdm] : ms.entries) {
    const Rdm& got = back.set.entries.at(key);
    CHECK(got.ambient_n == 4);
    CHECK(got.entries == rdm.entries);
  }
}

TEST_CASE("non-Hermitian marginal entries are symmetrized, not rejected") {
  MarginalSet ms = w_pair_set(random_w(3, 9));
  std::string text = io::serialize_marginals(ms);
  json j = json::parse(text);
  // Corrupt one off-diagonal entry only on one side of the diagonal.
  j["pairs"][0]["matrix"][0][1][0] =
      j["pairs"][0]["matrix"][0][1][0].get<double>() + 1e-3;
  const io::LoadedMarginals back = io::load_marginals(j.dump());
  CHECK(back.hermiticity_defect == doctest::Approx(1e-3).epsilon(1e-6));
  for (const auto& [key, rdm] : back.set.entries)
    CHECK((rdm.entries - rdm.entries.adjoint().eval()).cwiseAbs().maxCoeff() <
          1e-15);
  // The symmetrized value is the mean of the two reported halves.
  const cx orig = ms.entries.begin()->second.entries(0, 1);
  CHECK(std::abs(back.set.entries.begin()->second.entries(0, 1) -
                 (orig + cx(5e-4))) < 1e-12);
}

TEST_CASE("malformed documents raise ParseError with exact complaints") {
  CHECK_THROWS_AS(io::load_state("{\"n\": 3, \"kind\":"), ParseError);
  CHECK_THROWS_AS(io::load_state("{\"kind\": \"pure\"}"), ParseError);
  CHECK_THROWS_AS(io::load_state("{\"n\": 2, \"kind\": \"ghz\"}"), ParseError);
  CHECK_THROWS_AS(io::load_state("{\"n\": 0, \"kind\": \"w\", \"c\": []}"),
                  ParseError);
  // Wrong amplitude count.
  CHECK_THROWS_AS(
      io::load_state(
          "{\"n\": 2, \"kind\": \"pure\", \"amplitudes\": [[1,0],[0,0]]}"),
      ParseError);
  // Complex entries must be [re, im] pairs.
  CHECK_THROWS_AS(
      io::load_state("{\"n\": 1, \"kind\": \"w\", \"c\": [1.0]}"), ParseError);
  // Norm violations are parse-time failures, not crashes downstream.
  CHECK_THROWS_AS(
      io::load_state("{\"n\": 1, \"kind\": \"w\", \"c\": [[0.5,0]]}"),
      ParseError);
  // A pure file beyond the dense cap is a cap error, not a parse error.
  CHECK_THROWS_AS(
      io::load_state("{\"n\": 25, \"kind\": \"pure\", \"amplitudes\": []}"),
      CapExceeded);
}

TEST_CASE("marginal loading validates pairs strictly") {
  const std::string good = io::serialize_marginals(w_pair_set(random_w(3, 3)));
  json j = json::parse(good);
  SUBCASE("non-canonical pair") {
    j["pairs"][0]["parties"] = {2, 1};
    CHECK_THROWS_AS(io::load_marginals(j.dump()), ParseError);
  }
  SUBCASE("party out of range") {
    j["pairs"][0]["parties"] = {1, 4};
    CHECK_THROWS_AS(io::load_marginals(j.dump()), ParseError);
  }
  SUBCASE("duplicate pair") {
    j["pairs"].push_back(j["pairs"][0]);
    CHECK_THROWS_AS(io::load_marginals(j.dump()), ParseError);
  }
  SUBCASE("wrong matrix shape") {
    j["pairs"][0]["matrix"][0] = {{1.0, 0.0}};
    CHECK_THROWS_AS(io::load_marginals(j.dump()), ParseError);
  }
  SUBCASE("n below two") {
    j["n"] = 1;
    CHECK_THROWS_AS(io::load_marginals(j.dump()), ParseError);
  }
}

TEST_CASE("load_w_coefficients rejects pure-state files") {
  const std::string text = io::serialize_pure_state(random_pure(2, 4));
  CHECK_THROWS_AS(io::load_w_coefficients(text), ParseError);
  CHECK_NOTHROW(io::load_w_coefficients(io::serialize_w_coefficients(random_w(3, 5))));
}

TEST_CASE("reports carry the documented keys") {
  const WCoefficients c = random_w(4, 11);
  const ReconstructionReport rep = reconstruct_mixed(w_pair_set(c));
  const json j = json::parse(io::serialize_report(rep));
  for (const char* key : {"verdict", "step", "message", "phase_convention",
                          "coefficients", "residuals", "diagnostics",
                          "assumptions"})
    CHECK(j.contains(key));
  CHECK(j["verdict"] == "unique_w");
  CHECK(j["coefficients"].size() == 4);
  CHECK(j["residuals"].size() == 6);
  CHECK(j["assumptions"].empty());  // the mixed-state path assumes nothing extra
  // Coefficients serialize the reconstructed values exactly.
  for (int k = 0; k < 4; ++k) {
    CHECK(j["coefficients"][k][0].get<double>() == rep.coefficients.c(k).real());
    CHECK(j["coefficients"][k][1].get<double>() == rep.coefficients.c(k).imag());
  }
}

TEST_CASE("failed reconstructions serialize empty coefficients") {
  MarginalSet ms = w_pair_set(random_w(4, 13));
  ms.entries.erase(Pair{1, 2});
  const ReconstructionReport rep = reconstruct_mixed(ms);
  const json j = json::parse(io::serialize_report(rep));
  CHECK(j["verdict"] == "insufficient");
  CHECK(j["coefficients"].empty());
  CHECK(!j["message"].get<std::string>().empty());
}

TEST_CASE("counterexample files still parse as pure states") {
  const PureState psi = random_pure(3, 8);
  const std::string text =
      io::serialize_counterexample(psi, {{Pair{1, 2}, 0.0}, {Pair{1, 3}, 0.25}});
  const io::StateVariant back = io::load_state(text);
  REQUIRE(std::holds_alternative<PureState>(back));
  CHECK(std::get<PureState>(back).amplitudes == psi.amplitudes);
  const json j = json::parse(text);
  CHECK(j["residuals"]["1,3"] == 0.25);
}

TEST_CASE("file transport reads back what it wrote") {
  namespace fs = std::filesystem;
  const fs::path path =
      fs::temp_directory_path() / ("qmarg-io-" + std::to_string(getpid()));
  const std::string text = io::serialize_w_coefficients(random_w(5, 21));
  io::write_text(path.string(), text);
  CHECK(io::read_text(path.string()) == text);
  fs::remove(path);
  CHECK_THROWS_AS(io::read_text(path.string()), ParseError);
}
