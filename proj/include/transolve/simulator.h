#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "transolve/dataset.h"

namespace transolve {

enum class Layout { kOrbit, kLine, kTwoCluster, kGrid };

std::optional<Layout> ParseLayout(const std::string& name);
const char* ToString(Layout layout);

struct SceneConfig {
  Layout layout = Layout::kOrbit;
  int num_cameras = 20;
  int num_points = 500;
  double fov_half_angle_deg = 35.0;
  // Orbit and line: EG between cameras at most this many steps apart in
  // the sequence (the orbit wraps around).
  int neighbors = 3;
  // Grid: EG between cameras closer than this; non-positive means 1.5x the
  // lattice spacing diagonal.
  double max_eg_distance = 0.0;
  // Two-cluster: number of disjoint cross-cluster EGs.
  int cross_edges = 2;
  // Two-cluster: fraction of points visible from both groups.
  double shared_fraction = 0.3;
  // Camera pairs sharing fewer tracks get no EG.
  int min_matches = 5;
  bool emit_rotations = false;
  std::uint64_t seed = 0;

  nlohmann::json ToJson() const;
};

struct NoiseConfig {
  double sigma_bearing_deg = 0.0;
  double sigma_rot_deg = 0.0;
  double sigma_t_deg = 0.0;
  double p_eg_outlier = 0.0;
  double p_obs_outlier = 0.0;
  std::uint64_t seed = 0;

  // Throws Error(kInvalidInput) for negative sigmas or fractions outside
  // [0, 1].
  void Validate() const;
  nlohmann::json ToJson() const;
};

struct SimulatedScene {
  Dataset dataset;
  GroundTruth truth;
};

// Places cameras by layout, samples points in the viewing volume and
// derives exact bearings, EGs (R_ij = R_j R_i^T, t_ij ~ R_j (c_i - c_j))
// and tracks. The match count of an EG is the number of tracks seen by
// both cameras. Throws Error(kInfeasibleConfig) for fewer than three
// cameras or a camera observing fewer than ten points.
SimulatedScene GenerateScene(const SceneConfig& config);

// In order: rotates every bearing by |N(0, sigma_bearing)| about a random
// perpendicular axis; perturbs every EG rotation by |N(0, sigma_rot)| about
// a random axis and every translation direction like a bearing; replaces
// floor(p_eg_outlier * |E|) EGs with a uniformly random rotation and
// direction; replaces floor(p_obs_outlier * |obs|) bearings with random
// forward-hemisphere directions. Zero settings leave the data bit-identical.
CorruptionManifest Corrupt(Dataset* dataset, const NoiseConfig& noise);

// Counts of cameras, EGs, tracks and track lengths. For the two-cluster
// layout also the EG counts inside each group and across groups.
nlohmann::json SummarizeScene(const SimulatedScene& scene,
                              const SceneConfig& config);

}  // namespace transolve
