#include "transolve/graph.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <string>
#include <unordered_set>

#include "transolve/error.h"
#include "transolve/random.h"

namespace transolve {

namespace {

std::vector<std::vector<int>> Adjacency(const EgGraph& graph) {
  std::vector<std::vector<int>> adj(graph.num_cameras);
  for (const EgEdge& e : graph.edges) {
    adj[e.i].push_back(e.j);
    adj[e.j].push_back(e.i);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  return adj;
}

EgGraph KeepEdges(const EgGraph& graph, const std::vector<bool>& keep,
                  std::vector<EgEdge>* removed) {
  EgGraph out;
  out.num_cameras = graph.num_cameras;
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    if (keep[e]) {
      out.edges.push_back(graph.edges[e]);
    } else {
      removed->push_back(graph.edges[e]);
    }
  }
  return out;
}

}  // namespace

EdgeLookup::EdgeLookup(const EgGraph& graph) : n_(graph.num_cameras) {
  index_.reserve(graph.edges.size() * 2);
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    index_.emplace(Key(graph.edges[e].i, graph.edges[e].j),
                   static_cast<int>(e));
  }
}

std::int64_t EdgeLookup::Key(int a, int b) const {
  if (a > b) std::swap(a, b);
  return static_cast<std::int64_t>(a) * n_ + b;
}

int EdgeLookup::Find(int a, int b) const {
  if (a < 0 || b < 0 || a >= n_ || b >= n_) return -1;
  const auto it = index_.find(Key(a, b));
  return it == index_.end() ? -1 : it->second;
}

Rotation RelativeRotation(const EgEdge& edge, int a, int b) {
  if (edge.i == a && edge.j == b) return edge.r_ij;
  return edge.r_ij.inverse();
}

void ValidateGraph(const EgGraph& graph) {
  std::unordered_set<std::int64_t> seen;
  for (const EgEdge& e : graph.edges) {
    if (e.i < 0 || e.j >= graph.num_cameras || e.i >= e.j) {
      throw Error(ErrorCode::kInvalidInput,
                  "invalid EG edge (" + std::to_string(e.i) + ", " +
                      std::to_string(e.j) + ")");
    }
    const std::int64_t key =
        static_cast<std::int64_t>(e.i) * graph.num_cameras + e.j;
    if (!seen.insert(key).second) {
      throw Error(ErrorCode::kInvalidInput,
                  "duplicate EG edge (" + std::to_string(e.i) + ", " +
                      std::to_string(e.j) + ")");
    }
  }
}

std::vector<std::vector<int>> ConnectedComponents(const EgGraph& graph) {
  const auto adj = Adjacency(graph);
  std::vector<int> label(graph.num_cameras, -1);
  std::vector<std::vector<int>> components;
  for (int s = 0; s < graph.num_cameras; ++s) {
    if (label[s] >= 0) continue;
    std::vector<int> comp;
    std::queue<int> queue;
    queue.push(s);
    label[s] = static_cast<int>(components.size());
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop();
      comp.push_back(u);
      for (int v : adj[u]) {
        if (label[v] < 0) {
          label[v] = label[s];
          queue.push(v);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    components.push_back(std::move(comp));
  }
  std::stable_sort(components.begin(), components.end(),
                   [](const auto& a, const auto& b) {
                     return a.size() > b.size();
                   });
  return components;
}

EdgeFilterResult VerifyRotationLoops(const EgGraph& graph,
                                     double threshold_deg,
                                     std::uint64_t seed) {
  const auto adj = Adjacency(graph);
  const EdgeLookup lookup(graph);

  // Visits every 3-cycle i < j < k as (edge ij, edge jk, edge ik).
  auto for_each_cycle = [&](auto&& visit) {
    std::vector<int> common;
    for (std::size_t e = 0; e < graph.edges.size(); ++e) {
      const int i = graph.edges[e].i;
      const int j = graph.edges[e].j;
      common.clear();
      std::set_intersection(adj[i].begin(), adj[i].end(), adj[j].begin(),
                            adj[j].end(), std::back_inserter(common));
      for (int k : common) {
        if (k > j) visit(static_cast<int>(e), i, j, k);
      }
    }
  };

  std::int64_t total = 0;
  for_each_cycle([&](int, int, int, int) { ++total; });

  EdgeFilterResult result;
  std::vector<char> chosen;
  if (total > kMaxEnumeratedCycles) {
    // Floyd's sampling of distinct cycle indices.
    Rng rng(seed);
    std::unordered_set<std::int64_t> picked;
    picked.reserve(kSampledCycles * 2);
    for (std::int64_t r = total - kSampledCycles; r < total; ++r) {
      const auto t = static_cast<std::int64_t>(rng.Below(r + 1));
      if (!picked.insert(t).second) picked.insert(r);
    }
    chosen.assign(total, 0);
    for (std::int64_t t : picked) chosen[t] = 1;
    result.sampled = true;
  }

  std::vector<int> participates(graph.edges.size(), 0);
  std::vector<int> fails(graph.edges.size(), 0);
  std::int64_t index = 0;
  for_each_cycle([&](int e_ij, int i, int j, int k) {
    const std::int64_t this_index = index++;
    if (!chosen.empty() && !chosen[this_index]) return;
    const int e_jk = lookup.Find(j, k);
    const int e_ik = lookup.Find(i, k);
    const Rotation r_ij = RelativeRotation(graph.edges[e_ij], i, j);
    const Rotation r_jk = RelativeRotation(graph.edges[e_jk], j, k);
    const Rotation r_ki = RelativeRotation(graph.edges[e_ik], k, i);
    // Composition i -> j -> k -> i returns to camera i.
    const double angle = RadToDeg((r_ki * r_jk * r_ij).Angle());
    const bool failed = angle > threshold_deg;
    ++result.cycles_checked;
    if (failed) ++result.cycles_failed;
    for (int e : {e_ij, e_jk, e_ik}) {
      ++participates[e];
      if (failed) ++fails[e];
    }
  });

  std::vector<bool> keep(graph.edges.size(), true);
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    keep[e] = participates[e] == 0 || fails[e] < participates[e];
  }
  result.graph = KeepEdges(graph, keep, &result.removed);
  return result;
}

std::vector<Rotation> EstimateGlobalRotations(const EgGraph& graph) {
  const int n = graph.num_cameras;
  if (n == 0) return {};
  if (ConnectedComponents(graph).front().size() != static_cast<size_t>(n)) {
    throw Error(ErrorCode::kDisconnectedGraph,
                "rotation estimation requires a connected EG graph");
  }
  std::vector<std::vector<std::pair<int, int>>> nbrs(n);
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    nbrs[graph.edges[e].i].emplace_back(graph.edges[e].j, static_cast<int>(e));
    nbrs[graph.edges[e].j].emplace_back(graph.edges[e].i, static_cast<int>(e));
  }
  for (auto& v : nbrs) std::sort(v.begin(), v.end());

  // Chaining tree: prefer edges whose 3-cycles close well, so a surviving
  // outlier is not used to initialize its cameras.
  const auto adj = Adjacency(graph);
  const EdgeLookup lookup(graph);
  constexpr std::size_t kMaxCyclesPerEdge = 32;
  constexpr double kNoCycleScore = 180.0;
  std::vector<double> score(graph.edges.size(), kNoCycleScore);
  std::vector<int> common;
  std::vector<double> errors;
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const int i = graph.edges[e].i;
    const int j = graph.edges[e].j;
    common.clear();
    std::set_intersection(adj[i].begin(), adj[i].end(), adj[j].begin(),
                          adj[j].end(), std::back_inserter(common));
    if (common.size() > kMaxCyclesPerEdge) common.resize(kMaxCyclesPerEdge);
    errors.clear();
    const Rotation r_ij = RelativeRotation(graph.edges[e], i, j);
    for (int k : common) {
      const Rotation r_jk = RelativeRotation(graph.edges[lookup.Find(j, k)], j, k);
      const Rotation r_ki = RelativeRotation(graph.edges[lookup.Find(k, i)], k, i);
      errors.push_back(RadToDeg((r_ki * r_jk * r_ij).Angle()));
    }
    if (errors.empty()) continue;
    auto mid = errors.begin() + static_cast<std::ptrdiff_t>(errors.size() / 2);
    std::nth_element(errors.begin(), mid, errors.end());
    score[e] = *mid;
  }
  std::vector<int> order(graph.edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return score[a] < score[b]; });
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  std::vector<std::vector<std::pair<int, int>>> tree(n);
  for (int e : order) {
    const int a = find(graph.edges[e].i);
    const int b = find(graph.edges[e].j);
    if (a == b) continue;
    parent[a] = b;
    tree[graph.edges[e].i].emplace_back(graph.edges[e].j, e);
    tree[graph.edges[e].j].emplace_back(graph.edges[e].i, e);
  }
  for (auto& v : tree) std::sort(v.begin(), v.end());

  std::vector<Rotation> rotations(n);
  std::vector<bool> visited(n, false);
  std::queue<int> queue;
  queue.push(0);
  visited[0] = true;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop();
    for (const auto& [v, e] : tree[u]) {
      if (visited[v]) continue;
      rotations[v] = RelativeRotation(graph.edges[e], u, v) * rotations[u];
      visited[v] = true;
      queue.push(v);
    }
  }

  // Cauchy-weighted tangent averaging; residuals far beyond the scale barely
  // move a camera.
  constexpr int kMaxSweeps = 100;
  constexpr double kStopDeg = 1e-6;
  const double scale = DegToRad(kRobustScaleDeg);
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double max_update = 0.0;
    for (int i = 1; i < n; ++i) {
      Vec3 sum = Vec3::Zero();
      double weight = 0.0;
      for (const auto& [j, e] : nbrs[i]) {
        const Rotation predicted =
            RelativeRotation(graph.edges[e], j, i) * rotations[j];
        const Vec3 r = (predicted * rotations[i].inverse()).Log();
        const double w = 1.0 / (1.0 + r.squaredNorm() / (scale * scale));
        sum += w * r;
        weight += w;
      }
      const Vec3 step = sum / weight;
      rotations[i] = Rotation::Exp(step) * rotations[i];
      max_update = std::max(max_update, RadToDeg(step.norm()));
    }
    if (max_update < kStopDeg) break;
  }
  return rotations;
}

EdgeFilterResult FilterByOrientation(const EgGraph& graph,
                                     const std::vector<Rotation>& rotations,
                                     double threshold_deg) {
  if (rotations.size() != static_cast<std::size_t>(graph.num_cameras)) {
    throw Error(ErrorCode::kInvalidInput,
                "orientation filter needs one rotation per camera");
  }
  std::vector<bool> keep(graph.edges.size(), true);
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const EgEdge& edge = graph.edges[e];
    const Rotation implied = rotations[edge.j] * rotations[edge.i].inverse();
    keep[e] = GeodesicAngleDeg(implied, edge.r_ij) <= threshold_deg;
  }
  EdgeFilterResult result;
  result.graph = KeepEdges(graph, keep, &result.removed);
  return result;
}

TrackSelection SelectTracks(const std::vector<FeatureTrack>& tracks,
                            int coverage_target) {
  int max_cam = -1;
  std::vector<int> order;
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    if (tracks[t].length() < 3) continue;
    order.push_back(static_cast<int>(t));
    for (const Observation& o : tracks[t].observations) {
      max_cam = std::max(max_cam, o.camera_id);
    }
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return tracks[a].length() > tracks[b].length();
  });

  TrackSelection selection;
  selection.coverage.assign(max_cam + 1, 0);
  std::vector<bool> present(max_cam + 1, false);
  for (int t : order) {
    for (const Observation& o : tracks[t].observations) {
      present[o.camera_id] = true;
    }
  }
  int unsatisfied = static_cast<int>(
      std::count(present.begin(), present.end(), true));
  if (coverage_target <= 0) unsatisfied = 0;

  for (int t : order) {
    if (unsatisfied == 0) break;
    const auto& obs = tracks[t].observations;
    const bool useful = std::any_of(obs.begin(), obs.end(), [&](const auto& o) {
      return selection.coverage[o.camera_id] < coverage_target;
    });
    if (!useful) continue;
    selection.selected.push_back(t);
    for (const Observation& o : obs) {
      if (++selection.coverage[o.camera_id] == coverage_target) --unsatisfied;
    }
  }
  return selection;
}

double MstEdgeWeight(int matches, double triangulation_angle_deg,
                     double alpha) {
  return 1.0 / std::max(matches, 1) + alpha / triangulation_angle_deg;
}

TrackTree TrackMst(const FeatureTrack& track, const EgGraph& graph,
                   const EdgeLookup& lookup,
                   const std::vector<Rotation>& rotations, double alpha) {
  TrackTree tree;
  const auto& obs = track.observations;
  const int n = static_cast<int>(obs.size());
  if (n < 2) {
    tree.status = TrackTreeStatus::kTooShort;
    return tree;
  }

  struct Candidate {
    double weight;
    int lo;  // min camera id
    int hi;  // max camera id
    int a;   // local node indices
    int b;
    TreeEdge edge;
  };
  auto before = [](const Candidate& x, const Candidate& y) {
    if (x.weight != y.weight) return x.weight < y.weight;
    if (x.lo != y.lo) return x.lo < y.lo;
    return x.hi < y.hi;
  };

  // Dense candidate table over local node pairs.
  std::vector<std::vector<int>> slot(n, std::vector<int>(n, -1));
  std::vector<Candidate> candidates;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const int e = lookup.Find(obs[a].camera_id, obs[b].camera_id);
      if (e < 0) continue;
      const EgEdge& edge = graph.edges[e];
      const bool forward = edge.i == obs[a].camera_id;
      const Observation& oi = forward ? obs[a] : obs[b];
      const Observation& oj = forward ? obs[b] : obs[a];
      TreeEdge te;
      te.edge_index = e;
      const TriangleStatus status = ComputeTriangleCoefficients(
          rotations[edge.i], rotations[edge.j], edge.t_ij, oi, oj,
          &te.coefficients);
      if (status != TriangleStatus::kOk) {
        ++tree.dropped_triangles;
        continue;
      }
      te.weight = MstEdgeWeight(edge.matches,
                                te.coefficients.triangulation_angle_deg, alpha);
      slot[a][b] = slot[b][a] = static_cast<int>(candidates.size());
      candidates.push_back({te.weight, edge.i, edge.j, a, b, std::move(te)});
    }
  }

  // Prim's algorithm under the strict order (weight, lo, hi).
  std::vector<bool> in_tree(n, false);
  std::vector<int> best(n, -1);
  in_tree[0] = true;
  for (int v = 1; v < n; ++v) best[v] = slot[0][v];
  for (int step = 1; step < n; ++step) {
    int pick = -1;
    for (int v = 0; v < n; ++v) {
      if (in_tree[v] || best[v] < 0) continue;
      if (pick < 0 || before(candidates[best[v]], candidates[best[pick]])) {
        pick = v;
      }
    }
    if (pick < 0) {
      tree.status = TrackTreeStatus::kDisconnected;
      tree.edges.clear();
      return tree;
    }
    in_tree[pick] = true;
    tree.edges.push_back(candidates[best[pick]].edge);
    for (int v = 0; v < n; ++v) {
      const int c = slot[pick][v];
      if (in_tree[v] || c < 0) continue;
      if (best[v] < 0 || before(candidates[c], candidates[best[v]])) {
        best[v] = c;
      }
    }
  }
  return tree;
}

std::vector<std::pair<int, int>> PairEdgesForTrack(int num_tree_edges,
                                                   std::uint64_t seed) {
  std::vector<std::pair<int, int>> out;
  if (num_tree_edges < 2) return out;
  std::vector<std::pair<int, int>> remaining;
  for (int a = 0; a < num_tree_edges; ++a) {
    for (int b = a + 1; b < num_tree_edges; ++b) remaining.emplace_back(a, b);
  }
  std::vector<int> usage(num_tree_edges, 0);
  int under_used = num_tree_edges;
  Rng rng(seed);
  while (under_used > 0 && !remaining.empty()) {
    // Uniform over pairs not yet emitted; equivalent to rejection sampling.
    const std::size_t k = rng.Below(remaining.size());
    const auto pair = remaining[k];
    remaining[k] = remaining.back();
    remaining.pop_back();
    out.push_back(pair);
    for (int e : {pair.first, pair.second}) {
      if (++usage[e] == 2) --under_used;
    }
  }
  return out;
}

}  // namespace transolve
