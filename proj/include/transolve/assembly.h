#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "transolve/graph.h"
#include "transolve/pairwise.h"

namespace transolve {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Three rows sum_k blocks[k].second * c_{blocks[k].first} = 0, one block per
// distinct camera.
struct ConstraintRows {
  std::vector<std::pair<int, Mat3>> blocks;
};

// Eliminates the scene point between the midpoint expressions of two
// triangles on the same track:
//   (A_j - A_i)(c_i - c_j) + c_i + c_j = (A_l - A_k)(c_k - c_l) + c_k + c_l.
// Shared cameras have their coefficients summed. Throws
// Error(kIdenticalPairs) when both triangles use the same camera pair.
ConstraintRows BuildConstraint(const TriangleCoefficients& tc_a,
                               const TriangleCoefficients& tc_b);

struct RowProvenance {
  static constexpr int kGauge = -1;
  int track = kGauge;
  int edge_a = -1;
  int edge_b = -1;
  bool is_gauge() const { return track == kGauge; }
};

/// Homogeneous system A x = 0 over stacked camera centers
/// x = [c_0; c_1; ...; c_{N-1}]. Constraint rows come in blocks of three
/// with one provenance entry per block; the final block holds the three
/// gauge rows that pin the centroid to the origin.
struct SparseSystem {
  int rows = 0;
  int cols = 0;
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<RowProvenance> provenance;
  // Built by Finalize(); duplicate entries are summed.
  SparseMatrix matrix;

  int num_cameras() const { return cols / 3; }
  void Finalize();
};

struct AssemblyParams {
  double alpha = 0.1;
  std::uint64_t seed = 0;
  // Scale of the gauge rows relative to 1/sqrt(N). Non-positive selects the
  // spectral norm of the constraint rows (at least 1).
  double gauge_weight = 0.0;
};

struct AssemblyDiagnostics {
  int tracks_used = 0;
  int dropped_tracks = 0;
  int dropped_triangles = 0;
  int constraints = 0;
  double gauge_weight = 0.0;
};

struct AssembledSystem {
  SparseSystem system;
  AssemblyDiagnostics diagnostics;
};

// For every selected track: MST over its EG subgraph, seeded edge pairing,
// one constraint per pair; then the gauge rows. Throws Error(kEmptySystem)
// if no constraint survives.
AssembledSystem AssembleSystem(const EgGraph& graph,
                               const std::vector<Rotation>& rotations,
                               const std::vector<FeatureTrack>& tracks,
                               const TrackSelection& selection,
                               const AssemblyParams& params);

Eigen::VectorXd StackCenters(const std::vector<Vec3>& centers);
std::vector<Vec3> UnstackCenters(const Eigen::VectorXd& x);

struct BaselineVote {
  int agree = 0;
  int disagree = 0;
};

// Counts EG edges whose center difference c_j - c_i points along (agree) or
// against (disagree) the measured baseline direction.
BaselineVote CountBaselineAgreement(const std::vector<Vec3>& centers,
                                    const EgGraph& graph,
                                    const std::vector<Rotation>& rotations);

struct SolveReport {
  std::vector<Vec3> centers;
  double residual_l1 = 0.0;
  int iterations = 0;
  int dropped_triangles = 0;
  int dropped_tracks = 0;
  bool sign_flipped = false;
  bool converged = true;
};

// Unstacks the solution, resolves the global sign by majority baseline
// agreement, and recenters to zero mean. Centers keep the unit-norm scale of
// the solution.
SolveReport ExtractPositions(const Eigen::VectorXd& x,
                             const SparseSystem& system, const EgGraph& graph,
                             const std::vector<Rotation>& rotations);

// Matrix Market coordinate dump of the finalized matrix.
void WriteMatrixMarket(const SparseSystem& system, const std::string& path);

}  // namespace transolve
