// Copyright 2026 The inline-tomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "inline_tomo/cli.hpp"
#include "inline_tomo/io.hpp"

using namespace inline_tomo;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "inline-tomo");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("inline_tomo_cli_" + std::to_string(std::rand()) + "_" +
                                        std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("simulate then reconstruct recovers the state") {
    TempDir dir;
    const std::string cfg = dir / "c.json";
    write(cfg, R"({"N": 2, "layout": {"type": "symmetric", "M": 8}, "state": {"type": "noon"}})");
    Run r = run({"simulate", "--config", cfg, "--out", dir / "o"});
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir / "o/gamma.csv"));
    CHECK(fs::exists(dir / "o/resolved_config.json"));
    r = run({"reconstruct", "--config", cfg, "--out", dir / "o", "--counts", dir / "o/gamma.csv", "--truth",
             dir / "o/truth.json"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("fidelity: ") != std::string::npos);
    const auto rec = nlohmann::json::parse(io::read_text(dir / "o/reconstruction.json"));
    CHECK(rec["fidelity"].get<double>() > 1 - 1e-8);
  }

  TEST_CASE("round trip from a million sampled events") {
    TempDir dir;
    const std::string cfg = dir / "c.json";
    write(cfg, R"({"N": 2, "layout": {"type": "symmetric", "M": 8}, "state": {"type": "noon"},
                   "noise": {"events": 1e6}})");
    REQUIRE(run({"simulate", "--config", cfg, "--out", dir / "o"}).code == 0);
    REQUIRE(run({"reconstruct", "--config", cfg, "--out", dir / "o", "--counts", dir / "o/gamma.csv", "--truth",
                 dir / "o/truth.json"})
                .code == 0);
    const auto rec = nlohmann::json::parse(io::read_text(dir / "o/reconstruction.json"));
    CHECK(rec["fidelity"].get<double>() >= 0.999);
  }

  TEST_CASE("exported rates are normalized") {
    TempDir dir;
    REQUIRE(run({"simulate", "--out", dir / "o"}).code == 0);
    std::ifstream in(dir / "o/gamma.csv");
    const Eigen::VectorXd g = io::read_correlations(in, 6);
    CHECK(g.sum() == doctest::Approx(1.0));
    const auto summary = nlohmann::json::parse(io::read_text(dir / "o/simulate.json"));
    CHECK(summary["mu"] == 1.0);
  }

  TEST_CASE("seeded sampling is reproducible") {
    TempDir dir;
    const std::string cfg = dir / "c.json";
    write(cfg, R"({"noise": {"events": 1000}})");
    REQUIRE(run({"simulate", "--config", cfg, "--seed", "5", "--out", dir / "a"}).code == 0);
    REQUIRE(run({"--seed", "5", "simulate", "--config", cfg, "--out", dir / "b"}).code == 0);
    REQUIRE(run({"simulate", "--config", cfg, "--seed", "6", "--out", dir / "c"}).code == 0);
    const std::string a = io::read_text(dir / "a/gamma.csv");
    CHECK(a.find("count") != std::string::npos);
    CHECK(a == io::read_text(dir / "b/gamma.csv"));
    CHECK(a != io::read_text(dir / "c/gamma.csv"));
    const auto resolved = nlohmann::json::parse(io::read_text(dir / "a/resolved_config.json"));
    CHECK(resolved["seed"] == 5);
    CHECK(resolved["noise"]["events"] == 1000);
  }

  TEST_CASE("sweep, optimize and fluorescence write their outputs") {
    TempDir dir;
    Run r = run({"sweep", "--out", dir / "o", "--threads", "2"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("0.71") != std::string::npos);
    CHECK(fs::exists(dir / "o/sweep_beta.csv"));
    r = run({"optimize", "--out", dir / "o"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("optimal dz: 0.5") != std::string::npos);
    r = run({"fluorescence", "--synthetic", "--out", dir / "o"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("windows: 34") != std::string::npos);
    CHECK(fs::exists(dir / "o/trajectory.csv"));
    r = run({"fluorescence", "--trace", dir / "o/trace.csv", "--out", dir / "p"});
    CHECK(r.code == 0);
  }

  TEST_CASE("configuration and input errors exit with 2") {
    TempDir dir;
    const std::string cfg = dir / "c.json";
    write(cfg, R"({"coupler": {"C": 1.0, "gamma": 2}})");
    Run r = run({"simulate", "--config", cfg, "--out", dir / "o"});
    CHECK(r.code == 2);
    CHECK(r.err.find("coupler.gamma") != std::string::npos);
    write(cfg, "{not json");
    CHECK(run({"simulate", "--config", cfg, "--out", dir / "o"}).code == 2);
    write(cfg, R"({"N": 9})");
    CHECK(run({"simulate", "--config", cfg, "--out", dir / "o"}).code == 2);
    CHECK(run({"simulate", "--config", dir / "missing.json"}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"reconstruct", "--out", dir / "o"}).code == 2);
    write(dir / "bad.csv", "p,count\n1,1\n");
    CHECK(run({"reconstruct", "--out", dir / "o", "--counts", dir / "bad.csv"}).code == 2);
  }

  TEST_CASE("degenerate layouts exit with 4") {
    TempDir dir;
    const std::string cfg = dir / "c.json";
    write(cfg, R"({"layout": {"type": "symmetric", "M": 4}})");
    REQUIRE(run({"simulate", "--config", cfg, "--out", dir / "o"}).code == 0);
    for (const char* method : {"linear", "ml"}) {
      write(cfg, std::string(R"({"layout": {"type": "symmetric", "M": 4}, "reconstruct": {"method": ")") +
                     method + "\"}}");
      const Run r = run({"reconstruct", "--config", cfg, "--out", dir / "o", "--counts", dir / "o/gamma.csv"});
      CHECK(r.code == 4);
      CHECK(r.err.find("ill-conditioned") != std::string::npos);
    }
  }

  TEST_CASE("zero detuning exits with 4 and names the degeneracy") {
    TempDir dir;
    const std::string cfg = dir / "c.json";
    write(cfg, R"({"coupler": {"C": 1.0, "beta": 0.0}, "layout": {"type": "symmetric", "M": 8}})");
    REQUIRE(run({"simulate", "--config", cfg, "--out", dir / "o"}).code == 0);
    const Run r = run({"reconstruct", "--config", cfg, "--out", dir / "o", "--counts", dir / "o/gamma.csv"});
    CHECK(r.code == 4);
    CHECK(r.err.find("degenerate") != std::string::npos);
  }

  TEST_CASE("windows longer than the trace exit with 2") {
    TempDir dir;
    const std::string cfg = dir / "c.json";
    write(cfg, R"({"fluorescence": {"device_length_mm": 20}})");
    const Run r = run({"fluorescence", "--synthetic", "--config", cfg, "--out", dir / "o"});
    CHECK(r.code == 2);
    CHECK(r.err.find("34.26") != std::string::npos);
  }

  TEST_CASE("help exits with 0") {
    const Run r = run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("fluorescence") != std::string::npos);
  }
}
