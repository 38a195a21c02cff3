// End-to-end subprocess tests of the command-line tool: file formats, exit
// codes, determinism, and the documented example runs. The binary path comes
// from the QMARG_CLI environment variable (set by the test harness).

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int rc = -1;
  std::string out;
};

const std::string& cli_path() {
  static const std::string path = [] {
    const char* env = std::getenv("QMARG_CLI");
    REQUIRE_MESSAGE(env != nullptr, "QMARG_CLI must point at the binary");
    return std::string(env);
  }();
  return path;
}

const fs::path& work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("qmarg-cli-test-" + std::to_string(getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write_file(const std::string& name, const std::string& content) {
  const fs::path path = work_dir() / name;
  std::ofstream(path) << content;
  return path.string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RunResult run(const std::string& args) {
  RunResult result;
  const std::string cmd = cli_path() + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got = 0;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) result.out.append(buf, got);
  const int status = pclose(pipe);
  result.rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string uniform_w_file(const std::string& name, int n) {
  json c = json::array();
  for (int j = 0; j < n; ++j)
    c.push_back({1.0 / std::sqrt(double(n)), 0.0});
  return write_file(name, json{{"n", n}, {"kind", "w"}, {"c", c}}.dump());
}

std::string ghz_file(const std::string& name, int n) {
  json amps = json::array();
  const double r = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < (1 << n); ++i) {
    const bool edge = i == 0 || i == (1 << n) - 1;
    amps.push_back({edge ? r : 0.0, 0.0});
  }
  return write_file(name, json{{"n", n}, {"kind", "pure"}, {"amplitudes", amps}}.dump());
}

std::complex<double> entry(const json& matrix, int i, int j) {
  return {matrix[i][j][0].get<double>(), matrix[i][j][1].get<double>()};
}

}  // namespace

TEST_CASE("marginals of the two-excitation example state") {
  // (|001> + i|111>)/sqrt(2), parties {1,2}: the reduced matrix must have
  // 1/2 at (0,0) and (3,3), -i/2 at (0,3), and an exactly zero (2,3) entry.
  json amps = json::array();
  for (int i = 0; i < 8; ++i) amps.push_back({0.0, 0.0});
  const double r = 1.0 / std::sqrt(2.0);
  amps[1] = {r, 0.0};
  amps[7] = {0.0, r};
  const std::string state = write_file(
      "two_excitation.json", json{{"n", 3}, {"kind", "pure"}, {"amplitudes", amps}}.dump());
  const RunResult res = run("marginals " + state + " --subset 1,2");
  REQUIRE(res.rc == 0);
  const json m = json::parse(res.out)["pairs"][0]["matrix"];
  CHECK(std::abs(entry(m, 0, 0) - 0.5) < 1e-15);
  CHECK(std::abs(entry(m, 3, 3) - 0.5) < 1e-15);
  CHECK(std::abs(entry(m, 0, 3) - std::complex<double>(0, -0.5)) < 1e-15);
  CHECK(std::abs(entry(m, 2, 3)) < 1e-15);
  CHECK(std::abs(entry(m, 1, 1)) < 1e-15);
}

TEST_CASE("marginals of uniform W3 are three identical template matrices") {
  const std::string state = uniform_w_file("w3.json", 3);
  const RunResult res = run("marginals " + state);
  REQUIRE(res.rc == 0);
  const json pairs = json::parse(res.out)["pairs"];
  REQUIRE(pairs.size() == 3);
  for (const json& p : pairs) {
    const json& m = p["matrix"];
    for (int d = 0; d < 3; ++d) CHECK(std::abs(entry(m, d, d) - 1.0 / 3) < 1e-12);
    CHECK(std::abs(entry(m, 3, 3)) == 0.0);
    CHECK(std::abs(entry(m, 1, 2) - 1.0 / 3) < 1e-12);
  }
  CHECK(pairs[0]["matrix"] == pairs[1]["matrix"]);
  CHECK(pairs[1]["matrix"] == pairs[2]["matrix"]);
}

TEST_CASE("a full-subset request emits the whole projector") {
  const std::string state = uniform_w_file("w3b.json", 3);
  const RunResult res = run("marginals " + state + " --subset 1,2,3");
  REQUIRE(res.rc == 0);
  const json sub = json::parse(res.out)["subsets"][0];
  CHECK(sub["parties"] == json({1, 2, 3}));
  const json& m = sub["matrix"];
  REQUIRE(m.size() == 8);
  // |W3><W3| has 1/3 on every pair of single-one indices {1,2,4}.
  for (int i : {1, 2, 4})
    for (int j : {1, 2, 4}) CHECK(std::abs(entry(m, i, j) - 1.0 / 3) < 1e-12);
  CHECK(std::abs(entry(m, 0, 0)) == 0.0);
  CHECK(std::abs(entry(m, 7, 7)) == 0.0);
}

TEST_CASE("reconstruct round-trips W3 marginals with exit 0") {
  const std::string state = uniform_w_file("w3c.json", 3);
  const std::string mfile = (work_dir() / "m3.json").string();
  REQUIRE(run("marginals " + state + " --out " + mfile).rc == 0);
  const RunResult res = run("reconstruct " + mfile);
  CHECK(res.rc == 0);
  const json rep = json::parse(res.out);
  CHECK(rep["verdict"] == "unique_w");
  for (int k = 0; k < 3; ++k) {
    CHECK(std::abs(rep["coefficients"][k][0].get<double>() -
                   1.0 / std::sqrt(3.0)) < 1e-12);
    CHECK(rep["coefficients"][k][1].get<double>() == 0.0);
  }
}

TEST_CASE("reconstruct flags GHZ marginals as inconsistent with exit 4") {
  const std::string state = ghz_file("ghz3.json", 3);
  const std::string mfile = (work_dir() / "ghzm.json").string();
  REQUIRE(run("marginals " + state + " --out " + mfile).rc == 0);
  const RunResult res = run("reconstruct " + mfile);
  CHECK(res.rc == 4);
  const json rep = json::parse(res.out);
  CHECK(rep["verdict"] == "inconsistent");
  CHECK(rep["step"] == "step1:corner");
}

TEST_CASE("one missing pair yields insufficient with exit 5") {
  const std::string state = uniform_w_file("w5.json", 5);
  const std::string mfile = (work_dir() / "m5.json").string();
  REQUIRE(run("marginals " + state + " --out " + mfile).rc == 0);
  json m = json::parse(read_file(mfile));
  m["pairs"].erase(m["pairs"].size() - 1);
  const std::string cut = write_file("m5cut.json", m.dump());
  const RunResult res = run("reconstruct " + cut);
  CHECK(res.rc == 5);
  CHECK(json::parse(res.out)["verdict"] == "insufficient");
}

TEST_CASE("pure-star mode reconstructs from the n-1 star marginals") {
  const std::string state = uniform_w_file("w4.json", 4);
  const std::string mfile = (work_dir() / "m4star.json").string();
  REQUIRE(run("marginals " + state +
              " --subset 1,2 --subset 1,3 --subset 1,4 --out " + mfile)
              .rc == 0);
  const RunResult res = run("reconstruct " + mfile + " --mode pure-star");
  CHECK(res.rc == 0);
  const json rep = json::parse(res.out);
  CHECK(rep["verdict"] == "unique_w");
  REQUIRE(rep["assumptions"].size() == 1);  // purity is caller-asserted
}

TEST_CASE("verify-unique grades full and split coverage as documented") {
  const std::string w3 = uniform_w_file("w3d.json", 3);
  const RunResult full = run("verify-unique " + w3 + " --samples 500 --seed 7");
  REQUIRE(full.rc == 0);
  const json jf = json::parse(full.out);
  CHECK(jf["nullspace_dim"] == 27);
  CHECK(jf["feasible_count"] == 0);

  const std::string w4 = uniform_w_file("w4b.json", 4);
  const RunResult split =
      run("verify-unique " + w4 + " --pairs 12,34 --samples 200 --seed 7");
  REQUIRE(split.rc == 0);
  const json js = json::parse(split.out);
  CHECK(js["feasible_count"].get<int>() >= 1);
  CHECK(js["raw_feasible"] == 0);
  CHECK(js["probes_tested"] == 2);

  const std::string w2 = uniform_w_file("w2.json", 2);
  const RunResult trivial = run("verify-unique " + w2 + " --pairs 1-2");
  REQUIRE(trivial.rc == 0);
  CHECK(json::parse(trivial.out)["nullspace_dim"] == 0);
}

TEST_CASE("identical invocations produce byte-identical files") {
  const std::string w4 = uniform_w_file("w4c.json", 4);
  const std::string out1 = (work_dir() / "ev1.json").string();
  const std::string out2 = (work_dir() / "ev2.json").string();
  const std::string args = " --pairs 12,34 --samples 300 --seed 11 --out ";
  REQUIRE(run("verify-unique " + w4 + args + out1).rc == 0);
  REQUIRE(run("verify-unique " + w4 + args + out2).rc == 0);
  CHECK(read_file(out1) == read_file(out2));
}

TEST_CASE("counterexample reports zero residuals exactly on in-block pairs") {
  const std::string w4 = uniform_w_file("w4d.json", 4);
  const RunResult res = run("counterexample " + w4 +
                            " --blocks '34|12' --phases 0.7,1.9");
  REQUIRE(res.rc == 0);
  const json j = json::parse(res.out);
  CHECK(j["kind"] == "pure");
  CHECK(j["residuals"]["1,2"].get<double>() < 1e-12);
  CHECK(j["residuals"]["3,4"].get<double>() < 1e-12);
  for (const char* cross : {"1,3", "1,4", "2,3", "2,4"})
    CHECK(j["residuals"][cross].get<double>() > 1e-3);
}

TEST_CASE("the five-party block twist defeats the four-pair set") {
  const std::string w5 = uniform_w_file("w5b.json", 5);
  const RunResult res =
      run("counterexample " + w5 + " --blocks '1234|5' --phases 0,1.3");
  REQUIRE(res.rc == 0);
  const json j = json::parse(res.out);
  for (const char* inside : {"1,2", "1,3", "2,3", "3,4"})
    CHECK(j["residuals"][inside].get<double>() < 1e-12);
  CHECK(j["residuals"]["4,5"].get<double>() > 1e-3);
}

TEST_CASE("a single-block twist moves no marginal at all") {
  const std::string w4 = uniform_w_file("w4e.json", 4);
  const RunResult res =
      run("counterexample " + w4 + " --blocks 1,2,3,4 --phases 2.1");
  REQUIRE(res.rc == 0);
  for (const auto& [key, value] : json::parse(res.out)["residuals"].items())
    CHECK(value.get<double>() < 1e-12);
}

TEST_CASE("fit distinguishes rigid and flat marginal sets") {
  const std::string w4 = uniform_w_file("w4f.json", 4);
  const std::string mfile = (work_dir() / "m4split.json").string();
  REQUIRE(run("marginals " + w4 + " --subset 1,2 --subset 3,4 --out " + mfile)
              .rc == 0);
  const RunResult res = run("fit " + mfile + " --starts 6 --seed 3");
  REQUIRE(res.rc == 0);
  const json j = json::parse(res.out);
  CHECK(j["applicable"] == true);
  REQUIRE(j["minimizers"].size() >= 2);  // a flat family, not a single point
  for (const json& m : j["minimizers"])
    CHECK(m["residual"].get<double>() < 1e-6);

  const std::string ghz = ghz_file("ghz3b.json", 3);
  const std::string gm = (work_dir() / "ghzm2.json").string();
  REQUIRE(run("marginals " + ghz + " --out " + gm).rc == 0);
  const RunResult bad = run("fit " + gm);
  REQUIRE(bad.rc == 0);
  CHECK(json::parse(bad.out)["applicable"] == false);
}

TEST_CASE("exit codes separate parse failures from cap violations") {
  const std::string junk = write_file("junk.json", "{\"n\": 3,");
  CHECK(run("reconstruct " + junk).rc == 2);
  CHECK(run("marginals " + junk).rc == 2);
  CHECK(run("verify-unique " + junk).rc == 2);

  const std::string w4 = uniform_w_file("w4g.json", 4);
  CHECK(run("verify-unique " + w4 + " --pairs 1x").rc == 2);
  CHECK(run("counterexample " + w4 + " --blocks '12|3' --phases 0,1").rc == 2);
  CHECK(run("counterexample " + w4 + " --blocks '12|34' --phases 0").rc == 2);

  const std::string w8 = uniform_w_file("w8.json", 8);
  CHECK(run("verify-unique " + w8 + " --samples 1").rc == 3);

  CHECK(run("reconstruct " + (work_dir() / "no-such-file.json").string()).rc == 2);
  CHECK(run("frobnicate " + w4).rc == 2);  // unknown subcommand
}

TEST_CASE("stdin and stdout transport work through dash paths") {
  const std::string w3 = uniform_w_file("w3e.json", 3);
  const RunResult res = run("marginals - --subset 1,2 < " + w3);
  REQUIRE(res.rc == 0);
  const json j = json::parse(res.out);
  CHECK(j["n"] == 3);
  CHECK(j["pairs"].size() == 1);
}
