#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "transolve/geometry.h"
#include "transolve/pairwise.h"

namespace transolve {

// Default thresholds for the two data profiles.
struct ProfileDefaults {
  double loop_threshold_deg;
  double orientation_threshold_deg;
  double rho;
};
inline constexpr ProfileDefaults kSequentialProfile{3.0, 5.0, 1.01};
inline constexpr ProfileDefaults kInternetProfile{5.0, 10.0, 1.1};

inline constexpr int kDefaultCoverage = 30;
inline constexpr double kDefaultMstAlpha = 0.1;

/// Epipolar geometry between cameras i < j: R_j = r_ij R_i and
/// R_j (c_i - c_j) is parallel to t_ij.
struct EgEdge {
  int i = 0;
  int j = 0;
  Rotation r_ij;
  UnitVector t_ij;
  int matches = 0;
};

struct EgGraph {
  int num_cameras = 0;
  std::vector<EgEdge> edges;
};

// Unordered pair -> edge index lookup.
class EdgeLookup {
 public:
  explicit EdgeLookup(const EgGraph& graph);
  // Index into graph.edges, or -1.
  int Find(int a, int b) const;

 private:
  std::int64_t Key(int a, int b) const;
  std::int64_t n_;
  std::unordered_map<std::int64_t, int> index_;
};

// Relative rotation R_ab with R_b = R_ab R_a, for a stored edge in either
// orientation.
Rotation RelativeRotation(const EgEdge& edge, int a, int b);

// Throws Error(kInvalidInput) when ids are out of range, i >= j, or a pair
// appears twice.
void ValidateGraph(const EgGraph& graph);

// Camera sets of the connected components, largest first; ties by smallest
// camera id. Isolated cameras form singleton components.
std::vector<std::vector<int>> ConnectedComponents(const EgGraph& graph);

struct FeatureTrack {
  std::vector<Observation> observations;
  std::size_t length() const { return observations.size(); }
};

struct TrackSelection {
  std::vector<int> selected;
  std::vector<int> coverage;
};

struct EdgeFilterResult {
  EgGraph graph;
  std::vector<EgEdge> removed;
  std::int64_t cycles_checked = 0;
  std::int64_t cycles_failed = 0;
  bool sampled = false;
};

// Loop verification over all 3-cycles. A cycle fails when its chained
// rotation deviates from identity by more than threshold_deg. An edge is
// removed when it lies on at least one cycle and every one of its cycles
// fails. Above kMaxEnumeratedCycles cycles, kSampledCycles are drawn
// uniformly with the seeded generator.
inline constexpr std::int64_t kMaxEnumeratedCycles = 10'000'000;
inline constexpr std::int64_t kSampledCycles = 1'000'000;
EdgeFilterResult VerifyRotationLoops(const EgGraph& graph,
                                     double threshold_deg,
                                     std::uint64_t seed = 0);

// Plumbing-grade rotation averaging. Cameras are chained from camera 0
// (fixed to identity) along a spanning tree that prefers edges with the
// lowest median 3-cycle error, then refined by Gauss-Seidel tangent-space
// averaging with Cauchy weights of scale kRobustScaleDeg until the largest
// update is below 1e-6 degrees or 100 sweeps. Throws
// Error(kDisconnectedGraph).
inline constexpr double kRobustScaleDeg = 5.0;
std::vector<Rotation> EstimateGlobalRotations(const EgGraph& graph);

// Removes edges whose relative rotation disagrees with the global
// orientations by more than threshold_deg.
EdgeFilterResult FilterByOrientation(const EgGraph& graph,
                                     const std::vector<Rotation>& rotations,
                                     double threshold_deg);

// Greedy coverage selection over tracks with at least three observations,
// scanned by descending length (ascending index on ties).
TrackSelection SelectTracks(const std::vector<FeatureTrack>& tracks,
                            int coverage_target);

double MstEdgeWeight(int matches, double triangulation_angle_deg,
                     double alpha);

struct TreeEdge {
  int edge_index = 0;
  double weight = 0.0;
  TriangleCoefficients coefficients;
};

enum class TrackTreeStatus { kOk, kTooShort, kDisconnected };

struct TrackTree {
  TrackTreeStatus status = TrackTreeStatus::kOk;
  std::vector<TreeEdge> edges;
  // Observation pairs on EG edges rejected by the triangle checks.
  int dropped_triangles = 0;
};

// Minimum spanning tree of the EG subgraph induced by the track's cameras,
// with edge weight 1/M + alpha/theta. Edges whose triangle is degenerate or
// fails cheirality are excluded. Ties are broken by (i, j).
TrackTree TrackMst(const FeatureTrack& track, const EgGraph& graph,
                   const EdgeLookup& lookup,
                   const std::vector<Rotation>& rotations, double alpha);

// Random distinct pairs of tree edges (indices into the tree) until every
// edge has been used at least twice or no distinct pair is left. Returns
// an empty list for trees with fewer than two edges.
std::vector<std::pair<int, int>> PairEdgesForTrack(int num_tree_edges,
                                                   std::uint64_t seed);

}  // namespace transolve
