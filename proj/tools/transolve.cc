// Command-line driver: simulate | solve | eval | pipeline.

#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "transolve/dataset.h"
#include "transolve/error.h"
#include "transolve/pipeline.h"
#include "transolve/random.h"
#include "transolve/simulator.h"

namespace {

using namespace transolve;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitEmptySystem = 3;
constexpr int kExitNotConverged = 4;

struct SceneFlags {
  std::string layout = "orbit";
  SceneConfig scene;
  NoiseConfig noise;
};

void AddSceneFlags(CLI::App* cmd, SceneFlags* f) {
  cmd->add_option("--layout", f->layout, "orbit | line | two-cluster | grid");
  cmd->add_option("--cameras", f->scene.num_cameras, "number of cameras");
  cmd->add_option("--points", f->scene.num_points, "number of scene points");
  cmd->add_option("--fov", f->scene.fov_half_angle_deg, "half field of view (deg)");
  cmd->add_option("--neighbors", f->scene.neighbors,
                  "EG reach in the camera sequence (orbit, line)");
  cmd->add_option("--max-eg-distance", f->scene.max_eg_distance,
                  "EG distance limit (grid)");
  cmd->add_option("--cross-edges", f->scene.cross_edges,
                  "cross-group EGs (two-cluster)");
  cmd->add_option("--shared-fraction", f->scene.shared_fraction,
                  "points seen by both groups (two-cluster)");
  cmd->add_option("--min-matches", f->scene.min_matches, "EG match threshold");
  cmd->add_flag("--emit-rotations", f->scene.emit_rotations,
                "include ground-truth rotations in the dataset");
  cmd->add_option("--sigma-bearing", f->noise.sigma_bearing_deg, "deg");
  cmd->add_option("--sigma-rot", f->noise.sigma_rot_deg, "deg");
  cmd->add_option("--sigma-t", f->noise.sigma_t_deg, "deg");
  cmd->add_option("--p-eg-outlier", f->noise.p_eg_outlier, "fraction of EGs");
  cmd->add_option("--p-obs-outlier", f->noise.p_obs_outlier,
                  "fraction of observations");
}

bool ResolveScene(SceneFlags* f, std::uint64_t seed) {
  const auto layout = ParseLayout(f->layout);
  if (!layout) {
    std::cerr << "error: unknown layout '" << f->layout << "'\n";
    return false;
  }
  f->scene.layout = *layout;
  f->scene.seed = seed;
  f->noise.seed = MixSeed(seed, 1);
  return true;
}

struct SolveFlags {
  std::string profile = "sequential";
  std::string solver = "l1";
  std::optional<int> coverage;
  std::optional<double> alpha;
  std::optional<double> phi1;
  std::optional<double> phi2;
  std::optional<double> rho;
  std::optional<double> beta0;
  std::optional<double> beta_max;
  std::optional<int> max_iter;
  bool no_loop_filter = false;
  bool no_orientation_filter = false;
};

void AddSolveFlags(CLI::App* cmd, SolveFlags* f) {
  cmd->add_option("--profile", f->profile, "sequential | internet");
  cmd->add_option("--solver", f->solver, "l1 | l2");
  cmd->add_option("-K,--coverage", f->coverage, "track coverage per camera");
  cmd->add_option("--alpha", f->alpha, "MST angle weight");
  cmd->add_option("--phi1", f->phi1, "loop verification threshold (deg)");
  cmd->add_option("--phi2", f->phi2, "orientation filter threshold (deg)");
  cmd->add_option("--rho", f->rho, "penalty growth factor");
  cmd->add_option("--beta0", f->beta0, "initial penalty");
  cmd->add_option("--beta-max", f->beta_max, "penalty cap");
  cmd->add_option("--max-iter", f->max_iter, "ADMM iteration limit");
  cmd->add_flag("--no-loop-filter", f->no_loop_filter);
  cmd->add_flag("--no-orientation-filter", f->no_orientation_filter);
}

std::optional<RunConfig> ResolveRun(const SolveFlags& f, std::uint64_t seed) {
  const auto profile = ParseProfile(f.profile);
  const auto solver = ParseSolver(f.solver);
  if (!profile || !solver) {
    std::cerr << "error: unknown profile or solver\n";
    return std::nullopt;
  }
  RunConfig cfg = RunConfig::ForProfile(*profile);
  cfg.solver = *solver;
  cfg.seed = seed;
  if (f.coverage) cfg.coverage = *f.coverage;
  if (f.alpha) cfg.alpha = *f.alpha;
  if (f.phi1) cfg.loop_threshold_deg = *f.phi1;
  if (f.phi2) cfg.orientation_threshold_deg = *f.phi2;
  if (f.rho) cfg.rho = *f.rho;
  if (f.beta0) cfg.beta0 = *f.beta0;
  if (f.beta_max) cfg.beta_max = *f.beta_max;
  if (f.max_iter) cfg.max_iter = *f.max_iter;
  cfg.loop_filter = !f.no_loop_filter;
  cfg.orientation_filter = !f.no_orientation_filter;
  return cfg;
}

std::string TruthPath(const std::string& dataset_path) {
  std::filesystem::path p(dataset_path);
  return (p.parent_path() / p.stem()).string() + ".truth.json";
}

int ExitFor(const Error& e) {
  std::cerr << "error: " << e.what() << '\n';
  return e.code() == ErrorCode::kEmptySystem ? kExitEmptySystem : kExitInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Global camera translation estimation from EGs and tracks"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;

  SceneFlags sim;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "write a synthetic dataset");
  AddSceneFlags(simulate, &sim);
  simulate->add_option("--seed", seed, "generator seed");
  simulate->add_option("-o,--output", sim_out, "dataset path")->required();

  SolveFlags solve_flags;
  std::string solve_in, solve_out, ply_out, trace_out, mtx_out;
  auto* solve = app.add_subcommand("solve", "estimate camera positions");
  solve->add_option("dataset", solve_in, "dataset JSON")->required();
  AddSolveFlags(solve, &solve_flags);
  solve->add_option("--seed", seed, "solver seed");
  solve->add_option("-o,--output", solve_out, "positions JSON")->required();
  solve->add_option("--ply", ply_out, "also write camera centers as PLY");
  solve->add_option("--trace", trace_out, "ADMM trace CSV");
  solve->add_option("--dump-system", mtx_out, "Matrix Market dump of A");

  std::string eval_positions, eval_truth;
  auto* eval = app.add_subcommand("eval", "compare positions to ground truth");
  eval->add_option("positions", eval_positions, "positions JSON")->required();
  eval->add_option("truth", eval_truth, "truth sidecar JSON")->required();

  SceneFlags pipe_sim;
  SolveFlags pipe_solve;
  std::string pipe_out;
  auto* pipeline = app.add_subcommand("pipeline", "simulate, solve and evaluate");
  AddSceneFlags(pipeline, &pipe_sim);
  AddSolveFlags(pipeline, &pipe_solve);
  pipeline->add_option("--seed", seed, "seed for every stage");
  pipeline->add_option("-o,--output", pipe_out, "report path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (*simulate) {
      if (!ResolveScene(&sim, seed)) return kExitInvalid;
      SimulatedScene scene = GenerateScene(sim.scene);
      scene.truth.manifest = Corrupt(&scene.dataset, sim.noise);
      scene.truth.config["noise"] = sim.noise.ToJson();
      WriteTextFile(sim_out, DumpJson(DatasetToJson(scene.dataset)));
      WriteTextFile(TruthPath(sim_out), DumpJson(TruthToJson(scene.truth)));
      std::cout << DumpJson(SummarizeScene(scene, sim.scene));
      return kExitOk;
    }
    if (*solve) {
      const auto cfg = ResolveRun(solve_flags, seed);
      if (!cfg) return kExitInvalid;
      const Dataset dataset = DatasetFromJson(ReadJsonFile(solve_in));
      const SolveOutput out = RunSolve(dataset, *cfg);
      WriteTextFile(solve_out, DumpJson(PositionsToJson(out, *cfg)));
      if (!ply_out.empty()) WritePly(out.positions, ply_out);
      if (!trace_out.empty()) WriteTraceCsv(out.trace, trace_out);
      if (!mtx_out.empty()) WriteMatrixMarket(out.system, mtx_out);
      if (!out.diagnostics.converged) {
        std::cerr << "warning: solver did not converge; positions flagged\n";
        return kExitNotConverged;
      }
      return kExitOk;
    }
    if (*eval) {
      const nlohmann::json positions_json = ReadJsonFile(eval_positions);
      const auto positions = PositionsFromJson(positions_json);
      const GroundTruth truth = TruthFromJson(ReadJsonFile(eval_truth));
      const AlignmentResult result = EvaluatePositions(positions, truth);
      std::cout << DumpJson(MetricsToJson(result));
      return kExitOk;
    }
    if (*pipeline) {
      if (!ResolveScene(&pipe_sim, seed)) return kExitInvalid;
      const auto cfg = ResolveRun(pipe_solve, seed);
      if (!cfg) return kExitInvalid;
      const PipelineResult result = RunPipeline(pipe_sim.scene, pipe_sim.noise, *cfg);
      const std::string text = DumpJson(result.report);
      if (pipe_out.empty()) {
        std::cout << text;
      } else {
        WriteTextFile(pipe_out, text);
      }
      return result.converged ? kExitOk : kExitNotConverged;
    }
  } catch (const Error& e) {
    return ExitFor(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitOk;
}
