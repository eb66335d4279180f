#include "transolve/assembly.h"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>

#include "transolve/error.h"
#include "transolve/parallel.h"
#include "transolve/random.h"
#include "transolve/solver.h"

namespace transolve {

namespace {

void AddBlock(std::map<int, Mat3>* blocks, int cam, const Mat3& m) {
  auto [it, inserted] = blocks->try_emplace(cam, m);
  if (!inserted) it->second += m;
}

struct TrackRows {
  std::vector<ConstraintRows> rows;
  std::vector<RowProvenance> provenance;
  int dropped_triangles = 0;
  bool dropped = false;
};

}  // namespace

ConstraintRows BuildConstraint(const TriangleCoefficients& tc_a,
                               const TriangleCoefficients& tc_b) {
  const auto pair_a = std::minmax(tc_a.cam_i, tc_a.cam_j);
  const auto pair_b = std::minmax(tc_b.cam_i, tc_b.cam_j);
  if (pair_a == pair_b) {
    throw Error(ErrorCode::kIdenticalPairs,
                "constraint from identical camera pairs is vacuous");
  }
  const Mat3 id = Mat3::Identity();
  const Mat3 d_a = tc_a.a_j - tc_a.a_i;
  const Mat3 d_b = tc_b.a_j - tc_b.a_i;
  std::map<int, Mat3> blocks;
  AddBlock(&blocks, tc_a.cam_i, id + d_a);
  AddBlock(&blocks, tc_a.cam_j, id - d_a);
  AddBlock(&blocks, tc_b.cam_i, -(id + d_b));
  AddBlock(&blocks, tc_b.cam_j, -(id - d_b));
  ConstraintRows out;
  out.blocks.assign(blocks.begin(), blocks.end());
  return out;
}

void SparseSystem::Finalize() {
  matrix.resize(rows, cols);
  matrix.setFromTriplets(triplets.begin(), triplets.end());
  matrix.makeCompressed();
}

AssembledSystem AssembleSystem(const EgGraph& graph,
                               const std::vector<Rotation>& rotations,
                               const std::vector<FeatureTrack>& tracks,
                               const TrackSelection& selection,
                               const AssemblyParams& params) {
  const EdgeLookup lookup(graph);
  const int num_selected = static_cast<int>(selection.selected.size());
  std::vector<TrackRows> per_track(num_selected);

  ParallelFor(num_selected, [&](int s) {
    const int t = selection.selected[s];
    TrackRows& out = per_track[s];
    const TrackTree tree =
        TrackMst(tracks[t], graph, lookup, rotations, params.alpha);
    out.dropped_triangles = tree.dropped_triangles;
    if (tree.status != TrackTreeStatus::kOk || tree.edges.size() < 2) {
      out.dropped = true;
      return;
    }
    const auto pairs = PairEdgesForTrack(static_cast<int>(tree.edges.size()),
                                         MixSeed(params.seed, t));
    for (const auto& [a, b] : pairs) {
      out.rows.push_back(BuildConstraint(tree.edges[a].coefficients,
                                         tree.edges[b].coefficients));
      out.provenance.push_back(
          {t, tree.edges[a].edge_index, tree.edges[b].edge_index});
    }
  });

  AssembledSystem result;
  SparseSystem& sys = result.system;
  AssemblyDiagnostics& diag = result.diagnostics;
  sys.cols = 3 * graph.num_cameras;
  for (const TrackRows& tr : per_track) {
    diag.dropped_triangles += tr.dropped_triangles;
    if (tr.dropped) {
      ++diag.dropped_tracks;
      continue;
    }
    ++diag.tracks_used;
    for (std::size_t c = 0; c < tr.rows.size(); ++c) {
      for (const auto& [cam, block] : tr.rows[c].blocks) {
        for (int r = 0; r < 3; ++r) {
          for (int k = 0; k < 3; ++k) {
            if (block(r, k) != 0.0) {
              sys.triplets.emplace_back(sys.rows + r, 3 * cam + k,
                                        block(r, k));
            }
          }
        }
      }
      sys.rows += 3;
      sys.provenance.push_back(tr.provenance[c]);
    }
  }
  diag.constraints = static_cast<int>(sys.provenance.size());
  if (diag.constraints == 0) {
    throw Error(ErrorCode::kEmptySystem, "no constraint survived assembly");
  }

  double weight = params.gauge_weight;
  if (weight <= 0.0) {
    sys.Finalize();
    weight = std::max(1.0, std::sqrt(SpectralNormSq(sys.matrix, 1e-10,
                                                    params.seed)));
  }
  diag.gauge_weight = weight;
  const double g = weight / std::sqrt(static_cast<double>(graph.num_cameras));
  for (int cam = 0; cam < graph.num_cameras; ++cam) {
    for (int k = 0; k < 3; ++k) {
      sys.triplets.emplace_back(sys.rows + k, 3 * cam + k, g);
    }
  }
  sys.rows += 3;
  sys.provenance.push_back(RowProvenance{});
  sys.Finalize();
  return result;
}

Eigen::VectorXd StackCenters(const std::vector<Vec3>& centers) {
  Eigen::VectorXd x(3 * centers.size());
  for (std::size_t i = 0; i < centers.size(); ++i) {
    x.segment<3>(3 * i) = centers[i];
  }
  return x;
}

std::vector<Vec3> UnstackCenters(const Eigen::VectorXd& x) {
  std::vector<Vec3> centers(x.size() / 3);
  for (std::size_t i = 0; i < centers.size(); ++i) {
    centers[i] = x.segment<3>(3 * i);
  }
  return centers;
}

BaselineVote CountBaselineAgreement(const std::vector<Vec3>& centers,
                                    const EgGraph& graph,
                                    const std::vector<Rotation>& rotations) {
  BaselineVote vote;
  for (const EgEdge& e : graph.edges) {
    const UnitVector c_ij =
        BaselineDirection(rotations[e.i], rotations[e.j], e.t_ij);
    const double d = (centers[e.j] - centers[e.i]).dot(c_ij.vec());
    if (d > 0.0) {
      ++vote.agree;
    } else if (d < 0.0) {
      ++vote.disagree;
    }
  }
  return vote;
}

SolveReport ExtractPositions(const Eigen::VectorXd& x,
                             const SparseSystem& system, const EgGraph& graph,
                             const std::vector<Rotation>& rotations) {
  SolveReport report;
  report.centers = UnstackCenters(x);
  const BaselineVote vote =
      CountBaselineAgreement(report.centers, graph, rotations);
  if (vote.disagree > vote.agree) {
    report.sign_flipped = true;
    for (Vec3& c : report.centers) c = -c;
  }
  Vec3 mean = Vec3::Zero();
  for (const Vec3& c : report.centers) mean += c;
  if (!report.centers.empty()) mean /= static_cast<double>(report.centers.size());
  for (Vec3& c : report.centers) c -= mean;
  report.residual_l1 =
      (system.matrix * StackCenters(report.centers)).lpNorm<1>();
  return report;
}

void WriteMatrixMarket(const SparseSystem& system, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::kInvalidInput, "cannot write " + path);
  }
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << system.matrix.rows() << ' ' << system.matrix.cols() << ' '
      << system.matrix.nonZeros() << '\n';
  out << std::setprecision(17);
  for (int r = 0; r < system.matrix.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(system.matrix, r); it; ++it) {
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
    }
  }
}

}  // namespace transolve
