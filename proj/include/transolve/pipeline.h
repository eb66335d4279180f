#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "transolve/assembly.h"
#include "transolve/dataset.h"
#include "transolve/evaluate.h"
#include "transolve/simulator.h"
#include "transolve/solver.h"

namespace transolve {

enum class Profile { kSequential, kInternet };
enum class SolverKind { kL1, kL2 };

std::optional<Profile> ParseProfile(const std::string& name);
std::optional<SolverKind> ParseSolver(const std::string& name);
const char* ToString(Profile profile);
const char* ToString(SolverKind solver);

struct RunConfig {
  Profile profile = Profile::kSequential;
  int coverage = kDefaultCoverage;
  double alpha = kDefaultMstAlpha;
  double loop_threshold_deg = kSequentialProfile.loop_threshold_deg;
  double orientation_threshold_deg =
      kSequentialProfile.orientation_threshold_deg;
  double rho = kSequentialProfile.rho;
  double beta0 = 1e-6;
  double beta_max = 1e6;
  int max_iter = 10000;
  SolverKind solver = SolverKind::kL1;
  std::uint64_t seed = 0;
  bool loop_filter = true;
  bool orientation_filter = true;

  static RunConfig ForProfile(Profile profile);
  nlohmann::json ToJson() const;
};

struct SolveDiagnostics {
  int input_cameras = 0;
  int input_edges = 0;
  std::vector<std::pair<int, int>> loop_removed;         // camera ids
  std::vector<std::pair<int, int>> orientation_removed;  // camera ids
  std::vector<int> dropped_cameras;  // outside the largest component
  bool rotations_estimated = false;
  int edges_used = 0;
  int tracks_selected = 0;
  AssemblyDiagnostics assembly;
  int rows = 0;
  int cols = 0;
  bool converged = true;
  int iterations = 0;
  double residual_l1 = 0.0;
  double residual_l2 = 0.0;
  bool sign_flipped = false;

  nlohmann::json ToJson() const;
};

struct SolveOutput {
  std::vector<CameraPosition> positions;
  SolveDiagnostics diagnostics;
  std::vector<AdmmTraceEntry> trace;
  SparseSystem system;
};

// Loop verification, largest component, rotations (supplied or estimated),
// orientation filter, largest component, track selection, assembly and the
// L1 or L2 solve. Throws Error(kEmptySystem) when nothing is left to solve.
SolveOutput RunSolve(const Dataset& dataset, const RunConfig& config);

nlohmann::json PositionsToJson(const SolveOutput& output,
                               const RunConfig& config);

// Aligns positions to truth by camera id. Throws Error(kInvalidInput) when a
// position id is absent from the truth or fewer than three match.
AlignmentResult EvaluatePositions(const std::vector<CameraPosition>& positions,
                                  const GroundTruth& truth);

// Counts of manifest EG outliers removed by the filters versus surviving.
nlohmann::json OutlierAccounting(const SolveDiagnostics& diagnostics,
                                 const Dataset& dataset,
                                 const GroundTruth& truth);

struct PipelineResult {
  nlohmann::json report;
  bool converged = true;
};

// simulate -> corrupt -> solve -> eval in one process.
PipelineResult RunPipeline(const SceneConfig& scene, const NoiseConfig& noise,
                           const RunConfig& config);

}  // namespace transolve
