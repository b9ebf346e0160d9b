#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rlmc/cli.hpp"
#include "rlmc/io.hpp"

using namespace rlmc;
using namespace rlmc::cli;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "rlmc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag)
      : path(std::filesystem::temp_directory_path() / ("rlmc_cli_" + tag)) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

const std::string kData = "synthetic:n=10000,d=4,margin=0.2,noise=0.1,seed=5";

}  // namespace

TEST_CASE("exit codes by error kind") {
  CHECK(exit_code_for(ErrorKind::Io) == kInputError);
  CHECK(exit_code_for(ErrorKind::ParseError) == kInputError);
  CHECK(exit_code_for(ErrorKind::SchemaMismatch) == kInputError);
  CHECK(exit_code_for(ErrorKind::NoChunkFound) == kDomainError);
  CHECK(exit_code_for(ErrorKind::DegenerateInstance) == kDomainError);
  CHECK(exit_code_for(ErrorKind::ZeroObjective) == kDomainError);
  CHECK(exit_code_for(ErrorKind::NonFinite) == kNumericError);
}

TEST_CASE("probe specs") {
  const auto r = parse_probe_spec("random:50:3.5");
  CHECK(r.kind == ProbeSpec::Kind::Random);
  CHECK(r.count == 50);
  CHECK(r.max_norm == 3.5);
  CHECK(parse_probe_spec("random:8").max_norm == std::nullopt);
  CHECK(parse_probe_spec("trained").kind == ProbeSpec::Kind::Trained);
  CHECK(parse_probe_spec("zero").kind == ProbeSpec::Kind::Zero);
  CHECK(parse_probe_spec("file:/x/y.json").path == "/x/y.json");
  CHECK_THROWS_AS(parse_probe_spec("random:0"), Error);
  CHECK_THROWS_AS(parse_probe_spec("gaussian"), Error);

  const auto p = random_probes(3, 40, 2.0, std::nullopt, 7);
  REQUIRE(p.size() == 40);
  double lo = 1e300, hi = 0.0;
  for (const auto& h : p) {
    lo = std::min(lo, h.norm());
    hi = std::max(hi, h.norm());
  }
  CHECK(hi == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(lo == doctest::Approx(5e-4).epsilon(1e-12));
  const auto again = random_probes(3, 40, 2.0, std::nullopt, 7);
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(p[i].beta == again[i].beta);
}

TEST_CASE("probe files") {
  TempDir tmp("probes");
  std::ofstream(tmp.file("p.json")) << "{\"betas\": [[1, 2], [0, -1]]}";
  std::ofstream(tmp.file("p.txt")) << "1 2\n0,-1\n";
  for (const char* name : {"p.json", "p.txt"}) {
    const auto b = load_probes(tmp.file(name), 2);
    REQUIRE(b.size() == 2);
    CHECK(b[0].beta(1) == 2.0);
    CHECK(b[1].beta(1) == -1.0);
  }
  CHECK_THROWS_AS(load_probes(tmp.file("p.txt"), 3), Error);
}

TEST_CASE("sample sizes") {
  CHECK(parse_sizes("50,100,7", 1000) == std::vector<std::uint64_t>{50, 100, 7});
  CHECK(parse_sizes("50..100:geometric:1.5", 1000) == std::vector<std::uint64_t>{50, 75});
  const auto g = parse_sizes("50..n:geometric:1.1", 200);
  CHECK(g.front() == 50);
  CHECK(g.back() <= 200);
  CHECK_THROWS_AS(parse_sizes("10..n:geometric:1.0", 200), Error);
  CHECK_THROWS_AS(parse_sizes("a,b", 200), Error);
}

TEST_CASE("sample writes a uniform coreset") {
  TempDir tmp("sample");
  const auto r = run_cli({"sample", "--input", kData, "--size", "1000", "--seed", "3", "--output",
                          tmp.file("c.json")});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("u = 10\n") != std::string::npos);
  const auto cf = io::read_coreset(tmp.file("c.json"));
  CHECK(cf.n == 10000);
  CHECK(cf.q == 1000);
  CHECK(cf.mode == "iid");
  CHECK(cf.weighted().weight_sum() == 10000.0);

  const auto again = run_cli({"sample", "--input", kData, "--size", "1000", "--seed", "3", "--output",
                              tmp.file("d.json")});
  REQUIRE(again.code == 0);
  CHECK(io::read_coreset(tmp.file("d.json")) == cf);

  const auto stream = run_cli({"sample", "--input", kData, "--size", "100", "--mode", "reservoir",
                               "--output", tmp.file("s.json")});
  REQUIRE(stream.code == 0);
  const auto sf = io::read_coreset(tmp.file("s.json"));
  CHECK(sf.points.has_value());
  CHECK(sf.point_coreset().weight_sum() == 10000.0);
}

TEST_CASE("sample size from epsilon and delta") {
  TempDir tmp("eps");
  const auto r = run_cli({"sample", "--input", kData, "--epsilon", "0.5", "--delta", "0.1", "--output",
                          tmp.file("c.json")});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("warning") != std::string::npos);
  CHECK(io::read_coreset(tmp.file("c.json")).q == 10000);
  CHECK(run_cli({"sample", "--input", kData, "--epsilon", "0.5", "--output", tmp.file("x.json")}).code == 2);
}

TEST_CASE("verify: identity coreset has zero error and runs are reproducible") {
  TempDir tmp("verify");
  io::CoresetFile cf;
  cf.n = 10000;
  cf.q = 10000;
  cf.mode = "iid";
  cf.indices = WeightedCoreset<double>::identity(10000).indices;
  cf.weights.assign(10000, 1.0);
  cf.kappa = 0.5;
  io::write_coreset(tmp.file("id.json"), cf);
  const auto r = run_cli({"verify", "--input", kData, "--coreset", tmp.file("id.json"), "--betas",
                          "random:200", "--betas", "zero", "--report", tmp.file("r.json")});
  REQUIRE(r.code == 0);
  const auto rep = io::read_report(tmp.file("r.json"));
  CHECK(rep.results["max_H"].get<double>() <= 1e-15);
  CHECK(rep.results["probes"].get<int>() == 201);
  CHECK(rep.results["weight_check"]["pass"].get<bool>());

  REQUIRE(run_cli({"sample", "--input", kData, "--size", "500", "--output", tmp.file("c.json")}).code == 0);
  const std::vector<std::string> args{"verify", "--input", kData, "--coreset", tmp.file("c.json"),
                                      "--betas", "random:100", "--betas", "trained", "--report",
                                      tmp.file("v1.json")};
  REQUIRE(run_cli(args).code == 0);
  auto args2 = args;
  args2.back() = tmp.file("v2.json");
  REQUIRE(run_cli(args2).code == 0);
  const auto a = io::read_report(tmp.file("v1.json"));
  const auto b = io::read_report(tmp.file("v2.json"));
  CHECK(a.results["max_H"] == b.results["max_H"]);
  CHECK(a.results["max_H"].get<double>() > 0.0);

  // A coreset drawn from a different dataset size is rejected.
  const auto other = run_cli({"verify", "--input", "synthetic:n=50,d=4", "--coreset", tmp.file("c.json")});
  CHECK(other.code == 2);
}

TEST_CASE("input and domain errors map to exit codes") {
  const auto missing = run_cli({"train", "--input", "/nonexistent/data.svm"});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("error") != std::string::npos);
  CHECK(run_cli({"adversary", "--kind", "circle", "--n", "1000", "--k", "200"}).code == 3);
  CHECK(run_cli({"adversary", "--kind", "two-cluster", "--n", "100", "--kappa", "0.9", "--gamma", "0.9"}).code == 3);
  CHECK(run_cli({"bogus"}).code == 2);
  CHECK(run_cli({"sample", "--input", kData}).code == 2);
  CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("adversary reports") {
  TempDir tmp("adv");
  REQUIRE(run_cli({"adversary", "--kind", "two-cluster", "--n", "1000000", "--report", tmp.file("t.json")}).code == 0);
  const auto t = io::read_report(tmp.file("t.json"));
  CHECK(t.results["H"].get<double>() == doctest::Approx(0.64754699010865924).epsilon(1e-12));
  CHECK(t.results["count_b"].get<int>() == 15849);

  REQUIRE(run_cli({"adversary", "--kind", "circle", "--n", "100000", "--kappa", "0.1", "--gamma", "0.2",
                   "--k", "4", "--report", tmp.file("c.json")})
              .code == 0);
  const auto c = io::read_report(tmp.file("c.json"));
  CHECK(c.results["H"].get<double>() == doctest::Approx(0.16165253393072662).epsilon(1e-11));
  CHECK(c.results["chunk"]["start_index"].get<int>() == 3126);
}

TEST_CASE("train, sweep and bench run end to end") {
  TempDir tmp("run");
  const auto tr = run_cli({"train", "--input", kData, "--trace", tmp.file("t.csv"), "--report", tmp.file("t.json")});
  REQUIRE(tr.code == 0);
  std::ifstream trace(tmp.file("t.csv"));
  const auto tt = io::read_trace_csv(trace);
  CHECK(tt.points.size() >= 2);
  CHECK(io::read_report(tmp.file("t.json")).results["converged"].get<bool>());

  const auto sw = run_cli({"sweep", "--input", kData, "--sizes", "100,400", "--trials", "2", "--report",
                           tmp.file("s.json"), "--csv", tmp.file("s.csv")});
  REQUIRE(sw.code == 0);
  const auto s = io::read_report(tmp.file("s.json"));
  REQUIRE(s.results["sizes"].size() == 2);
  CHECK(s.results["sizes"][0]["H"].size() == 2);

  const auto be = run_cli({"bench", "--input", kData, "--trials", "1", "--epochs", "2", "--report",
                           tmp.file("b.json")});
  REQUIRE(be.code == 0);
  const auto b = io::read_report(tmp.file("b.json"));
  CHECK(b.results["q"].get<int>() == 2000);
  CHECK(b.results["trials"].size() == 1);
}
