#include "transolve/pipeline.h"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "transolve/error.h"

namespace transolve {

namespace {

using nlohmann::json;

// Sub-problem over a subset of cameras with compact indices.
struct Restricted {
  EgGraph graph;
  std::vector<FeatureTrack> tracks;  // index-aligned with the parent's
  std::optional<std::vector<Rotation>> rotations;
  std::vector<int> to_parent;
};

Restricted Restrict(const EgGraph& graph,
                    const std::vector<FeatureTrack>& tracks,
                    const std::optional<std::vector<Rotation>>& rotations,
                    const std::vector<int>& cameras) {
  Restricted out;
  out.to_parent = cameras;
  std::vector<int> local(graph.num_cameras, -1);
  for (std::size_t k = 0; k < cameras.size(); ++k) {
    local[cameras[k]] = static_cast<int>(k);
  }
  out.graph.num_cameras = static_cast<int>(cameras.size());
  for (const EgEdge& e : graph.edges) {
    if (local[e.i] < 0 || local[e.j] < 0) continue;
    EgEdge copy = e;
    copy.i = local[e.i];
    copy.j = local[e.j];
    out.graph.edges.push_back(copy);
  }
  out.tracks.resize(tracks.size());
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    for (const Observation& o : tracks[t].observations) {
      if (local[o.camera_id] >= 0) {
        out.tracks[t].observations.push_back({local[o.camera_id], o.bearing});
      }
    }
  }
  if (rotations) {
    std::vector<Rotation> sub;
    for (int c : cameras) sub.push_back((*rotations)[c]);
    out.rotations = std::move(sub);
  }
  return out;
}

std::vector<std::pair<int, int>> EdgeIds(const std::vector<EgEdge>& edges,
                                         const std::vector<int>& to_root,
                                         const std::vector<int>& ids) {
  std::vector<std::pair<int, int>> out;
  for (const EgEdge& e : edges) {
    out.emplace_back(ids[to_root[e.i]], ids[to_root[e.j]]);
  }
  return out;
}

json PairsToJson(const std::vector<std::pair<int, int>>& pairs) {
  json arr = json::array();
  for (const auto& [a, b] : pairs) arr.push_back({a, b});
  return arr;
}

}  // namespace

std::optional<Profile> ParseProfile(const std::string& name) {
  if (name == "sequential") return Profile::kSequential;
  if (name == "internet") return Profile::kInternet;
  return std::nullopt;
}

std::optional<SolverKind> ParseSolver(const std::string& name) {
  if (name == "l1") return SolverKind::kL1;
  if (name == "l2") return SolverKind::kL2;
  return std::nullopt;
}

const char* ToString(Profile profile) {
  return profile == Profile::kSequential ? "sequential" : "internet";
}

const char* ToString(SolverKind solver) {
  return solver == SolverKind::kL1 ? "l1" : "l2";
}

RunConfig RunConfig::ForProfile(Profile profile) {
  const ProfileDefaults& d =
      profile == Profile::kSequential ? kSequentialProfile : kInternetProfile;
  RunConfig cfg;
  cfg.profile = profile;
  cfg.loop_threshold_deg = d.loop_threshold_deg;
  cfg.orientation_threshold_deg = d.orientation_threshold_deg;
  cfg.rho = d.rho;
  return cfg;
}

json RunConfig::ToJson() const {
  return {{"profile", ToString(profile)},
          {"K", coverage},
          {"alpha", alpha},
          {"phi1_deg", loop_threshold_deg},
          {"phi2_deg", orientation_threshold_deg},
          {"rho", rho},
          {"beta0", beta0},
          {"beta_max", beta_max},
          {"max_iter", max_iter},
          {"solver", ToString(solver)},
          {"seed", seed},
          {"loop_filter", loop_filter},
          {"orientation_filter", orientation_filter}};
}

json SolveDiagnostics::ToJson() const {
  return {{"input_cameras", input_cameras},
          {"input_edges", input_edges},
          {"loop_removed", PairsToJson(loop_removed)},
          {"orientation_removed", PairsToJson(orientation_removed)},
          {"dropped_cameras", dropped_cameras},
          {"rotations_estimated", rotations_estimated},
          {"edges_used", edges_used},
          {"tracks_selected", tracks_selected},
          {"tracks_used", assembly.tracks_used},
          {"dropped_tracks", assembly.dropped_tracks},
          {"dropped_triangles", assembly.dropped_triangles},
          {"constraints", assembly.constraints},
          {"gauge_weight", assembly.gauge_weight},
          {"rows", rows},
          {"cols", cols},
          {"converged", converged},
          {"iterations", iterations},
          {"residual_l1", residual_l1},
          {"residual_l2", residual_l2},
          {"sign_flipped", sign_flipped}};
}

SolveOutput RunSolve(const Dataset& dataset, const RunConfig& config) {
  ValidateGraph(dataset.graph);
  SolveOutput out;
  SolveDiagnostics& diag = out.diagnostics;
  diag.input_cameras = dataset.graph.num_cameras;
  diag.input_edges = static_cast<int>(dataset.graph.edges.size());

  std::vector<int> identity(dataset.graph.num_cameras);
  for (int k = 0; k < dataset.graph.num_cameras; ++k) identity[k] = k;

  EgGraph graph = dataset.graph;
  if (config.loop_filter) {
    EdgeFilterResult loops =
        VerifyRotationLoops(graph, config.loop_threshold_deg, config.seed);
    diag.loop_removed = EdgeIds(loops.removed, identity, dataset.camera_ids);
    graph = std::move(loops.graph);
  }
  if (graph.num_cameras == 0 || graph.edges.empty()) {
    throw Error(ErrorCode::kEmptySystem, "no EG survived loop verification");
  }

  Restricted first = Restrict(graph, dataset.tracks, dataset.rotations,
                              ConnectedComponents(graph).front());
  std::vector<Rotation> rotations;
  if (first.rotations) {
    rotations = *first.rotations;
  } else {
    rotations = EstimateGlobalRotations(first.graph);
    diag.rotations_estimated = true;
  }

  EgGraph filtered = first.graph;
  if (config.orientation_filter) {
    EdgeFilterResult orient = FilterByOrientation(
        first.graph, rotations, config.orientation_threshold_deg);
    diag.orientation_removed =
        EdgeIds(orient.removed, first.to_parent, dataset.camera_ids);
    filtered = std::move(orient.graph);
  }
  Restricted second = Restrict(filtered, first.tracks, rotations,
                               ConnectedComponents(filtered).front());
  const std::vector<Rotation>& rots = *second.rotations;
  std::vector<int> to_root(second.to_parent.size());
  for (std::size_t k = 0; k < to_root.size(); ++k) {
    to_root[k] = first.to_parent[second.to_parent[k]];
  }
  {
    std::vector<bool> kept(dataset.graph.num_cameras, false);
    for (int r : to_root) kept[r] = true;
    for (int k = 0; k < dataset.graph.num_cameras; ++k) {
      if (!kept[k]) diag.dropped_cameras.push_back(dataset.camera_ids[k]);
    }
  }
  if (second.graph.num_cameras < 3 || second.graph.edges.empty()) {
    throw Error(ErrorCode::kEmptySystem,
                "largest component has fewer than three cameras");
  }
  diag.edges_used = static_cast<int>(second.graph.edges.size());

  const TrackSelection selection = SelectTracks(second.tracks, config.coverage);
  diag.tracks_selected = static_cast<int>(selection.selected.size());

  AssemblyParams params;
  params.alpha = config.alpha;
  params.seed = config.seed;
  AssembledSystem assembled =
      AssembleSystem(second.graph, rots, second.tracks, selection, params);
  diag.assembly = assembled.diagnostics;
  const SparseSystem& sys = assembled.system;
  diag.rows = sys.rows;
  diag.cols = sys.cols;

  Eigen::VectorXd x;
  if (config.solver == SolverKind::kL2) {
    const SingularVectorResult sv =
        SmallestSingularVector(sys.matrix, 1e-12, config.seed);
    x = sv.x;
    diag.converged = sv.converged;
    diag.iterations = sv.iterations;
  } else {
    AdmmParams admm;
    admm.beta0 = config.beta0;
    admm.beta_max = config.beta_max;
    admm.rho = config.rho;
    admm.max_iter = config.max_iter;
    admm.seed = config.seed;
    AdmmResult result = AdmmSolve(sys.matrix, admm);
    x = result.x;
    diag.converged = result.converged;
    diag.iterations = result.iterations;
    out.trace = std::move(result.trace);
  }

  const SolveReport report = ExtractPositions(x, sys, second.graph, rots);
  diag.residual_l1 = report.residual_l1;
  diag.residual_l2 = (sys.matrix * StackCenters(report.centers)).norm();
  diag.sign_flipped = report.sign_flipped;
  for (std::size_t k = 0; k < report.centers.size(); ++k) {
    out.positions.push_back({dataset.camera_ids[to_root[k]], report.centers[k]});
  }
  out.system = std::move(assembled.system);
  return out;
}

json PositionsToJson(const SolveOutput& output, const RunConfig& config) {
  json cams = json::array();
  for (const CameraPosition& p : output.positions) {
    cams.push_back({{"id", p.id}, {"c", VecToJson(p.center)}});
  }
  return {{"cameras", std::move(cams)},
          {"converged", output.diagnostics.converged},
          {"config", config.ToJson()},
          {"diagnostics", output.diagnostics.ToJson()}};
}

AlignmentResult EvaluatePositions(const std::vector<CameraPosition>& positions,
                                  const GroundTruth& truth) {
  std::unordered_map<int, int> index;
  for (std::size_t k = 0; k < truth.camera_ids.size(); ++k) {
    index.emplace(truth.camera_ids[k], static_cast<int>(k));
  }
  std::vector<Vec3> est;
  std::vector<Vec3> gt;
  for (const CameraPosition& p : positions) {
    const auto it = index.find(p.id);
    if (it == index.end()) {
      throw Error(ErrorCode::kInvalidInput,
                  "camera id " + std::to_string(p.id) + " not in truth");
    }
    est.push_back(p.center);
    gt.push_back(truth.cameras[it->second].center);
  }
  return SimilarityAlign(est, gt);
}

json OutlierAccounting(const SolveDiagnostics& diagnostics,
                       const Dataset& dataset, const GroundTruth& truth) {
  std::set<std::pair<int, int>> outliers;
  for (const auto& [a, b] : truth.manifest.eg_outliers) {
    outliers.emplace(dataset.camera_ids[a], dataset.camera_ids[b]);
  }
  auto count = [&](const std::vector<std::pair<int, int>>& removed) {
    int hit = 0;
    for (const auto& e : removed) hit += outliers.count(e) ? 1 : 0;
    return hit;
  };
  const int loop_hits = count(diagnostics.loop_removed);
  const int orient_hits = count(diagnostics.orientation_removed);
  const int removed_total = static_cast<int>(diagnostics.loop_removed.size() +
                                             diagnostics.orientation_removed.size());
  const int outlier_total = static_cast<int>(outliers.size());
  return {{"eg_outliers", outlier_total},
          {"removed_by_loops", loop_hits},
          {"removed_by_orientation", orient_hits},
          {"surviving", outlier_total - loop_hits - orient_hits},
          {"false_removals", removed_total - loop_hits - orient_hits},
          {"obs_outliers", truth.manifest.obs_outliers.size()}};
}

PipelineResult RunPipeline(const SceneConfig& scene_config,
                           const NoiseConfig& noise, const RunConfig& config) {
  SimulatedScene scene = GenerateScene(scene_config);
  scene.truth.manifest = Corrupt(&scene.dataset, noise);
  scene.truth.config["noise"] = noise.ToJson();

  const SolveOutput solved = RunSolve(scene.dataset, config);
  const AlignmentResult alignment = EvaluatePositions(solved.positions, scene.truth);

  PipelineResult result;
  result.converged = solved.diagnostics.converged;
  result.report = {
      {"config", config.ToJson()},
      {"scene", scene_config.ToJson()},
      {"noise", noise.ToJson()},
      {"dataset",
       {{"cameras", scene.dataset.camera_ids.size()},
        {"egs", scene.dataset.graph.edges.size()},
        {"tracks", scene.dataset.tracks.size()}}},
      {"diagnostics", solved.diagnostics.ToJson()},
      {"outliers", OutlierAccounting(solved.diagnostics, scene.dataset, scene.truth)},
      {"metrics", MetricsToJson(alignment)},
      {"converged", solved.diagnostics.converged}};
  return result;
}

}  // namespace transolve
