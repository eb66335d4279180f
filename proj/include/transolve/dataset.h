#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "transolve/graph.h"

namespace transolve {

/// Solver input: cameras, optional global orientations, EGs and tracks.
/// Cameras are addressed internally by their position in camera_ids; the
/// ids themselves only appear in files.
struct Dataset {
  std::vector<int> camera_ids;
  std::optional<std::vector<Rotation>> rotations;
  EgGraph graph;
  std::vector<FeatureTrack> tracks;
};

struct CameraPose {
  Rotation rotation;
  Vec3 center = Vec3::Zero();
};

// Entities altered by outlier injection, in internal camera indices.
struct CorruptionManifest {
  std::vector<std::pair<int, int>> eg_outliers;
  // (track index, camera index)
  std::vector<std::pair<int, int>> obs_outliers;
};

struct GroundTruth {
  std::vector<int> camera_ids;
  std::vector<CameraPose> cameras;
  // Scene point of each track, index-aligned with Dataset::tracks.
  std::vector<Vec3> points;
  CorruptionManifest manifest;
  // Free-form generator settings, echoed into the sidecar.
  nlohmann::json config = nlohmann::json::object();
};

struct CameraPosition {
  int id = 0;
  Vec3 center = Vec3::Zero();
};

// JSON text with every double printed using 17 significant digits and
// non-finite values as null. Object keys are sorted.
std::string DumpJson(const nlohmann::json& j, int indent = 2);

nlohmann::json DatasetToJson(const Dataset& dataset);
// Throws Error(kInvalidInput) on schema violations or unknown ids. Vectors
// off unit norm by more than 1e-6 are renormalized with a warning on
// stderr.
Dataset DatasetFromJson(const nlohmann::json& j);

nlohmann::json TruthToJson(const GroundTruth& truth);
GroundTruth TruthFromJson(const nlohmann::json& j);

nlohmann::json QuaternionToJson(const Rotation& r);
nlohmann::json VecToJson(const Vec3& v);

std::vector<CameraPosition> PositionsFromJson(const nlohmann::json& j);

nlohmann::json ReadJsonFile(const std::string& path);
void WriteTextFile(const std::string& path, const std::string& text);

// ASCII PLY with one vertex per camera center.
void WritePly(const std::vector<CameraPosition>& positions,
              const std::string& path);

}  // namespace transolve
