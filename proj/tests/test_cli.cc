#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "transolve/dataset.h"
#include "transolve/pipeline.h"

using namespace transolve;
namespace fs = std::filesystem;

namespace {

// Scratch directory, removed at exit.
struct ScratchDir {
  fs::path path = fs::temp_directory_path() /
                  ("transolve_cli_" + std::to_string(::getpid()));
  ScratchDir() { fs::create_directories(path); }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

fs::path WorkDir() {
  static const ScratchDir dir;
  return dir.path;
}

std::string P(const std::string& name) { return (WorkDir() / name).string(); }

int Run(const std::string& args, const std::string& stdout_file = "") {
  std::string cmd = std::string(TRANSOLVE_CLI) + " " + args;
  cmd += " > " + (stdout_file.empty() ? std::string("/dev/null") : stdout_file);
  cmd += " 2> " + P("stderr.txt");
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double Median(const std::string& metrics_file) {
  return ReadJsonFile(metrics_file).at("median").get<double>();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate is deterministic and writes a truth sidecar") {
  const std::string args =
      "simulate --layout line --cameras 10 --points 500 --seed 7 -o ";
  REQUIRE(Run(args + P("line_a.json")) == 0);
  REQUIRE(Run(args + P("line_b.json")) == 0);
  CHECK(Slurp(P("line_a.json")) == Slurp(P("line_b.json")));
  CHECK(Slurp(P("line_a.truth.json")) == Slurp(P("line_b.truth.json")));
  CHECK_FALSE(Slurp(P("line_a.json")).empty());
}

TEST_CASE("simulate reports two-cluster block densities") {
  REQUIRE(Run("simulate --layout two-cluster --seed 3 -o " + P("tc.json"),
              P("tc_summary.json")) == 0);
  const auto summary = ReadJsonFile(P("tc_summary.json"));
  CHECK(summary.at("blocks").at("cross").get<int>() == 2);
  CHECK(summary.at("blocks").at("density_a").get<double>() > 0.5);
}

TEST_CASE("invalid input exits with 2") {
  CHECK(Run("simulate --layout spiral -o " + P("bad.json")) == 2);
  CHECK(Run("simulate --cameras 2 -o " + P("bad.json")) == 2);
  CHECK(Run("simulate --sigma-t -1 -o " + P("bad.json")) == 2);
  CHECK(Run("solve " + P("missing.json") + " -o " + P("out.json")) == 2);
  CHECK(Run("frobnicate") == 2);
  CHECK(Run("pipeline --solver l3") == 2);
}

TEST_CASE("solve and eval on a noise-free orbit") {
  REQUIRE(Run("simulate --layout orbit --seed 11 -o " + P("orbit.json")) == 0);
  REQUIRE(Run("solve " + P("orbit.json") + " --solver l2 -o " + P("l2.json") +
              " --ply " + P("l2.ply") + " --trace " + P("unused.csv") +
              " --dump-system " + P("a.mtx")) == 0);
  REQUIRE(Run("solve " + P("orbit.json") + " --solver l1 -o " + P("l1.json") +
              " --trace " + P("l1.csv")) == 0);
  const auto l2 = ReadJsonFile(P("l2.json"));
  CHECK(l2.at("diagnostics").at("residual_l2").get<double>() < 1e-9);
  CHECK(l2.at("cameras").size() == 20);

  REQUIRE(Run("eval " + P("l2.json") + " " + P("orbit.truth.json"),
              P("m2.json")) == 0);
  REQUIRE(Run("eval " + P("l1.json") + " " + P("orbit.truth.json"),
              P("m1.json")) == 0);
  CHECK(Median(P("m2.json")) < 1e-9);
  CHECK(Median(P("m1.json")) < 1e-9);

  // Cross-solver agreement after alignment.
  const auto p1 = PositionsFromJson(ReadJsonFile(P("l1.json")));
  const auto p2 = PositionsFromJson(ReadJsonFile(P("l2.json")));
  std::vector<Vec3> a, b;
  for (std::size_t k = 0; k < p1.size(); ++k) {
    REQUIRE(p1[k].id == p2[k].id);
    a.push_back(p1[k].center);
    b.push_back(p2[k].center);
  }
  CHECK(SimilarityAlign(a, b).max_error < 1e-6 * 20.0);

  const std::string ply = Slurp(P("l2.ply"));
  CHECK(ply.rfind("ply\nformat ascii 1.0\n", 0) == 0);
  CHECK(ply.find("element vertex 20") != std::string::npos);
  CHECK(Slurp(P("a.mtx")).rfind("%%MatrixMarket matrix coordinate real general", 0) == 0);
  CHECK(Slurp(P("l1.csv")).rfind("iteration,beta,primal_residual,l1_objective", 0) == 0);
}

TEST_CASE("eval of truth and transformed truth") {
  REQUIRE(Run("simulate --layout grid --cameras 9 --seed 12 -o " + P("grid.json")) == 0);
  const GroundTruth truth = TruthFromJson(ReadJsonFile(P("grid.truth.json")));
  nlohmann::json same, moved;
  for (std::size_t k = 0; k < truth.cameras.size(); ++k) {
    const Vec3 c = truth.cameras[k].center;
    const Vec3 m = 3.0 * (Rotation::FromAngleAxis(1.0, Vec3(1, 1, 0).normalized()) * c) +
                   Vec3(5, -2, 1);
    same["cameras"].push_back({{"id", truth.camera_ids[k]}, {"c", VecToJson(c)}});
    moved["cameras"].push_back({{"id", truth.camera_ids[k]}, {"c", VecToJson(m)}});
  }
  WriteTextFile(P("same.json"), DumpJson(same));
  WriteTextFile(P("moved.json"), DumpJson(moved));
  REQUIRE(Run("eval " + P("same.json") + " " + P("grid.truth.json"), P("ms.json")) == 0);
  REQUIRE(Run("eval " + P("moved.json") + " " + P("grid.truth.json"), P("mm.json")) == 0);
  CHECK(Median(P("ms.json")) < 1e-12);
  CHECK(Median(P("mm.json")) < 1e-9);

  moved["cameras"][0]["id"] = 999;
  WriteTextFile(P("badid.json"), DumpJson(moved));
  CHECK(Run("eval " + P("badid.json") + " " + P("grid.truth.json")) == 2);
}

TEST_CASE("corrupted dataset reports filtered and surviving outliers") {
  REQUIRE(Run("pipeline --layout orbit --cameras 24 --neighbors 5 --seed 13 "
              "--p-eg-outlier 0.2 --sigma-t 0.5 -o " + P("corrupt.json")) == 0);
  const auto r = ReadJsonFile(P("corrupt.json"));
  const auto& o = r.at("outliers");
  CHECK(o.at("eg_outliers").get<int>() > 0);
  CHECK(o.at("removed_by_loops").get<int>() + o.at("removed_by_orientation").get<int>() +
            o.at("surviving").get<int>() ==
        o.at("eg_outliers").get<int>());
}

TEST_CASE("empty system exits with 3") {
  REQUIRE(Run("simulate --layout orbit --cameras 6 --seed 14 -o " + P("e.json")) == 0);
  auto d = ReadJsonFile(P("e.json"));
  d["tracks"] = nlohmann::json::array();
  WriteTextFile(P("notracks.json"), DumpJson(d));
  CHECK(Run("solve " + P("notracks.json") + " -o " + P("e_out.json")) == 3);
}

TEST_CASE("non-convergence exits with 4 and still writes positions") {
  REQUIRE(Run("simulate --layout orbit --seed 15 --sigma-t 1 --sigma-bearing 0.5 -o " +
              P("nc.json")) == 0);
  CHECK(Run("solve " + P("nc.json") + " --max-iter 3 -o " + P("nc_out.json")) == 4);
  const auto out = ReadJsonFile(P("nc_out.json"));
  CHECK_FALSE(out.at("converged").get<bool>());
  CHECK(out.at("cameras").size() == 20);
}

TEST_CASE("pipeline reports are deterministic and echo the profile") {
  const std::string args = "pipeline --layout line --solver l1 --seed 1 -o ";
  REQUIRE(Run(args + P("p1.json")) == 0);
  REQUIRE(Run(args + P("p2.json")) == 0);
  CHECK(Slurp(P("p1.json")) == Slurp(P("p2.json")));
  CHECK(ReadJsonFile(P("p1.json")).at("metrics").contains("median"));

  REQUIRE(Run("pipeline --profile internet --seed 1", P("inet.json")) == 0);
  const auto cfg = ReadJsonFile(P("inet.json")).at("config");
  CHECK(cfg.at("rho").get<double>() == 1.1);
  CHECK(cfg.at("phi1_deg").get<double>() == 5.0);
  CHECK(cfg.at("phi2_deg").get<double>() == 10.0);
  CHECK(cfg.at("K").get<int>() == 30);
  CHECK(cfg.at("alpha").get<double>() == 0.1);
  CHECK(cfg.at("beta0").get<double>() == 1e-6);
}

}  // TEST_SUITE
