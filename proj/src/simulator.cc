#include "transolve/simulator.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "transolve/error.h"
#include "transolve/random.h"

namespace transolve {

namespace {

// Camera looking from center toward target; image y axis points away from up.
Rotation LookAt(const Vec3& center, const Vec3& target, const Vec3& up) {
  const Vec3 z = (target - center).normalized();
  const Vec3 x = z.cross(up).normalized();
  const Vec3 y = z.cross(x);
  Mat3 r;
  r.row(0) = x;
  r.row(1) = y;
  r.row(2) = z;
  return Rotation::FromMatrix(r);
}

Vec3 SampleBall(Rng& rng, double radius) {
  Vec3 p;
  do {
    p = Vec3(rng.Uniform(-1, 1), rng.Uniform(-1, 1), rng.Uniform(-1, 1));
  } while (p.squaredNorm() > 1.0);
  return radius * p;
}

Vec3 RandomPerpendicular(Rng& rng, const Vec3& v) {
  Vec3 a;
  do {
    a = rng.UnitSphere();
    a -= a.dot(v) * v;
  } while (a.norm() < 1e-6);
  return a.normalized();
}

UnitVector PerturbDirection(Rng& rng, const UnitVector& d, double sigma_deg) {
  const double angle = std::abs(rng.Normal()) * DegToRad(sigma_deg);
  const Vec3 axis = RandomPerpendicular(rng, d.vec());
  return Rotation::FromAngleAxis(angle, axis) * d;
}

Rotation RandomRotation(Rng& rng) {
  return Rotation(Eigen::Quaterniond(rng.Normal(), rng.Normal(), rng.Normal(),
                                     rng.Normal()));
}

// Group tag per camera / point for the two-cluster visibility model:
// 0 = group A, 1 = group B, 2 = shared (points only).
struct Placement {
  std::vector<CameraPose> cameras;
  std::vector<int> camera_group;
  std::vector<Vec3> points;
  std::vector<int> point_group;
};

Placement PlaceOrbit(const SceneConfig& cfg, Rng& rng) {
  Placement p;
  const Vec3 up(0, 0, 1);
  for (int k = 0; k < cfg.num_cameras; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / cfg.num_cameras;
    const Vec3 c(10.0 * std::cos(phi), 10.0 * std::sin(phi), 0.0);
    p.cameras.push_back({LookAt(c, Vec3::Zero(), up), c});
  }
  for (int k = 0; k < cfg.num_points; ++k) p.points.push_back(SampleBall(rng, 3.0));
  return p;
}

Placement PlaceLine(const SceneConfig& cfg, Rng& rng) {
  Placement p;
  const Vec3 forward(0, 1, 0);
  const Vec3 up(0, 0, 1);
  for (int k = 0; k < cfg.num_cameras; ++k) {
    const Vec3 c(static_cast<double>(k), 0.0, 0.0);
    p.cameras.push_back({LookAt(c, c + forward, up), c});
  }
  const double length = cfg.num_cameras - 1.0;
  for (int k = 0; k < cfg.num_points; ++k) {
    p.points.emplace_back(rng.Uniform(-3.0, length + 3.0), rng.Uniform(6, 14),
                          rng.Uniform(-3.0, 3.0));
  }
  return p;
}

Placement PlaceTwoCluster(const SceneConfig& cfg, Rng& rng) {
  Placement p;
  const Vec3 up(0, 0, 1);
  const int n_a = cfg.num_cameras / 2;
  const int n_b = cfg.num_cameras - n_a;
  auto arc = [&](int count, double center_deg, int group) {
    for (int k = 0; k < count; ++k) {
      const double t = count == 1 ? 0.5 : static_cast<double>(k) / (count - 1);
      const double phi = DegToRad(center_deg - 15.0 + 30.0 * t);
      const Vec3 c(10.0 * std::cos(phi), 10.0 * std::sin(phi),
                   0.5 * std::sin(3.0 * phi + k));
      p.cameras.push_back({LookAt(c, Vec3::Zero(), up), c});
      p.camera_group.push_back(group);
    }
  };
  arc(n_a, 0.0, 0);
  arc(n_b, 60.0, 1);
  for (int k = 0; k < cfg.num_points; ++k) {
    p.points.push_back(SampleBall(rng, 3.0));
    const double u = rng.Uniform();
    const double half = 0.5 * (1.0 - cfg.shared_fraction);
    p.point_group.push_back(u < cfg.shared_fraction ? 2
                            : u < cfg.shared_fraction + half ? 0
                                                             : 1);
  }
  return p;
}

Placement PlaceGrid(const SceneConfig& cfg, Rng& rng) {
  Placement p;
  const int side =
      static_cast<int>(std::ceil(std::sqrt(static_cast<double>(cfg.num_cameras))));
  constexpr double kSpacing = 2.0;
  for (int k = 0; k < cfg.num_cameras; ++k) {
    const Vec3 c(kSpacing * (k % side), kSpacing * (k / side), 10.0);
    p.cameras.push_back({LookAt(c, c - Vec3(0, 0, 1), Vec3(0, 1, 0)), c});
  }
  const double extent = kSpacing * (side - 1);
  const int rows = (cfg.num_cameras + side - 1) / side;
  const double extent_y = kSpacing * (rows - 1);
  for (int k = 0; k < cfg.num_points; ++k) {
    p.points.emplace_back(rng.Uniform(-3.0, extent + 3.0),
                          rng.Uniform(-3.0, extent_y + 3.0),
                          rng.Uniform(-1.0, 1.0));
  }
  return p;
}

bool Visible(const SceneConfig& cfg, const Placement& pl, int cam, int pt) {
  if (!pl.point_group.empty()) {
    const int g = pl.point_group[pt];
    if (g != 2 && g != pl.camera_group[cam]) return false;
  }
  const Vec3 x = pl.cameras[cam].rotation * (pl.points[pt] - pl.cameras[cam].center);
  if (x.z() <= 0.1) return false;
  const double angle = std::atan2(x.head<2>().norm(), x.z());
  return angle <= DegToRad(cfg.fov_half_angle_deg);
}

bool WantEdge(const SceneConfig& cfg, const Placement& pl, int a, int b) {
  const int n = cfg.num_cameras;
  switch (cfg.layout) {
    case Layout::kOrbit: {
      const int d = std::abs(a - b);
      return std::min(d, n - d) <= cfg.neighbors;
    }
    case Layout::kLine:
      return std::abs(a - b) <= cfg.neighbors;
    case Layout::kGrid: {
      const double limit = cfg.max_eg_distance > 0.0
                               ? cfg.max_eg_distance
                               : 1.5 * 2.0 * std::sqrt(2.0);
      return (pl.cameras[a].center - pl.cameras[b].center).norm() <= limit;
    }
    case Layout::kTwoCluster: {
      if (pl.camera_group[a] == pl.camera_group[b]) return true;
      const int n_a = n / 2;
      const int lo = std::min(a, b);
      const int hi = std::max(a, b);
      // Disjoint nearest pairs across the gap: (A_last - r, B_r).
      for (int r = 0; r < cfg.cross_edges && r < n_a && n_a + r < n; ++r) {
        if (lo == n_a - 1 - r && hi == n_a + r) return true;
      }
      return false;
    }
  }
  return false;
}

}  // namespace

std::optional<Layout> ParseLayout(const std::string& name) {
  if (name == "orbit") return Layout::kOrbit;
  if (name == "line") return Layout::kLine;
  if (name == "two-cluster") return Layout::kTwoCluster;
  if (name == "grid") return Layout::kGrid;
  return std::nullopt;
}

const char* ToString(Layout layout) {
  switch (layout) {
    case Layout::kOrbit:
      return "orbit";
    case Layout::kLine:
      return "line";
    case Layout::kTwoCluster:
      return "two-cluster";
    case Layout::kGrid:
      return "grid";
  }
  return "unknown";
}

nlohmann::json SceneConfig::ToJson() const {
  return {{"layout", ToString(layout)},
          {"cameras", num_cameras},
          {"points", num_points},
          {"fov_half_angle_deg", fov_half_angle_deg},
          {"neighbors", neighbors},
          {"max_eg_distance", max_eg_distance},
          {"cross_edges", cross_edges},
          {"shared_fraction", shared_fraction},
          {"min_matches", min_matches},
          {"emit_rotations", emit_rotations},
          {"seed", seed}};
}

void NoiseConfig::Validate() const {
  const bool ok = sigma_bearing_deg >= 0.0 && sigma_rot_deg >= 0.0 &&
                  sigma_t_deg >= 0.0 && p_eg_outlier >= 0.0 &&
                  p_eg_outlier <= 1.0 && p_obs_outlier >= 0.0 &&
                  p_obs_outlier <= 1.0;
  if (!ok) throw Error(ErrorCode::kInvalidInput, "invalid noise configuration");
}

nlohmann::json NoiseConfig::ToJson() const {
  return {{"sigma_bearing_deg", sigma_bearing_deg},
          {"sigma_rot_deg", sigma_rot_deg},
          {"sigma_t_deg", sigma_t_deg},
          {"p_eg_outlier", p_eg_outlier},
          {"p_obs_outlier", p_obs_outlier},
          {"seed", seed}};
}

SimulatedScene GenerateScene(const SceneConfig& cfg) {
  if (cfg.num_cameras < 3) {
    throw Error(ErrorCode::kInfeasibleConfig, "at least three cameras required");
  }
  if (cfg.num_points < 1 || cfg.fov_half_angle_deg <= 0.0 ||
      cfg.fov_half_angle_deg >= 90.0) {
    throw Error(ErrorCode::kInfeasibleConfig, "invalid point count or fov");
  }
  if (cfg.layout == Layout::kTwoCluster &&
      (cfg.shared_fraction < 0.0 || cfg.shared_fraction > 1.0)) {
    throw Error(ErrorCode::kInfeasibleConfig, "shared fraction outside [0, 1]");
  }
  Rng rng(cfg.seed);
  Placement pl;
  switch (cfg.layout) {
    case Layout::kOrbit:
      pl = PlaceOrbit(cfg, rng);
      break;
    case Layout::kLine:
      pl = PlaceLine(cfg, rng);
      break;
    case Layout::kTwoCluster:
      pl = PlaceTwoCluster(cfg, rng);
      break;
    case Layout::kGrid:
      pl = PlaceGrid(cfg, rng);
      break;
  }

  const int n = cfg.num_cameras;
  SimulatedScene scene;
  Dataset& ds = scene.dataset;
  GroundTruth& truth = scene.truth;
  ds.graph.num_cameras = n;
  for (int k = 0; k < n; ++k) ds.camera_ids.push_back(k);
  truth.camera_ids = ds.camera_ids;
  truth.cameras = pl.cameras;

  std::vector<int> seen(n, 0);
  std::vector<std::vector<int>> shared(n, std::vector<int>(n, 0));
  for (int pt = 0; pt < cfg.num_points; ++pt) {
    FeatureTrack track;
    for (int cam = 0; cam < n; ++cam) {
      if (!Visible(cfg, pl, cam, pt)) continue;
      const Vec3 x =
          pl.cameras[cam].rotation * (pl.points[pt] - pl.cameras[cam].center);
      track.observations.push_back({cam, UnitVector(x)});
    }
    if (track.length() < 2) continue;
    for (std::size_t a = 0; a < track.length(); ++a) {
      const int ca = track.observations[a].camera_id;
      ++seen[ca];
      for (std::size_t b = a + 1; b < track.length(); ++b) {
        ++shared[ca][track.observations[b].camera_id];
      }
    }
    ds.tracks.push_back(std::move(track));
    truth.points.push_back(pl.points[pt]);
  }
  for (int cam = 0; cam < n; ++cam) {
    if (seen[cam] < 10) {
      throw Error(ErrorCode::kInfeasibleConfig,
                  "camera " + std::to_string(cam) + " observes " +
                      std::to_string(seen[cam]) + " points (< 10)");
    }
  }

  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (shared[a][b] < cfg.min_matches || !WantEdge(cfg, pl, a, b)) continue;
      const CameraPose& ci = pl.cameras[a];
      const CameraPose& cj = pl.cameras[b];
      EgEdge e;
      e.i = a;
      e.j = b;
      e.r_ij = cj.rotation * ci.rotation.inverse();
      e.t_ij = UnitVector(cj.rotation * (ci.center - cj.center));
      e.matches = shared[a][b];
      ds.graph.edges.push_back(e);
    }
  }
  if (ds.graph.edges.empty()) {
    throw Error(ErrorCode::kInfeasibleConfig, "no camera pair shares enough points");
  }
  if (cfg.emit_rotations) {
    std::vector<Rotation> rotations;
    for (const CameraPose& c : pl.cameras) rotations.push_back(c.rotation);
    ds.rotations = std::move(rotations);
  }
  truth.config = {{"scene", cfg.ToJson()}};
  return scene;
}

CorruptionManifest Corrupt(Dataset* dataset, const NoiseConfig& noise) {
  noise.Validate();
  Rng rng(noise.seed);
  CorruptionManifest manifest;
  auto& tracks = dataset->tracks;
  auto& edges = dataset->graph.edges;

  if (noise.sigma_bearing_deg > 0.0) {
    for (auto& track : tracks) {
      for (auto& obs : track.observations) {
        obs.bearing = PerturbDirection(rng, obs.bearing, noise.sigma_bearing_deg);
      }
    }
  }
  for (EgEdge& e : edges) {
    if (noise.sigma_rot_deg > 0.0) {
      const double angle = std::abs(rng.Normal()) * DegToRad(noise.sigma_rot_deg);
      e.r_ij = Rotation::FromAngleAxis(angle, rng.UnitSphere()) * e.r_ij;
    }
    if (noise.sigma_t_deg > 0.0) {
      e.t_ij = PerturbDirection(rng, e.t_ij, noise.sigma_t_deg);
    }
  }

  // Partial Fisher-Yates over edge indices.
  const auto num_eg_outliers = static_cast<std::size_t>(
      std::floor(noise.p_eg_outlier * static_cast<double>(edges.size())));
  if (num_eg_outliers > 0) {
    std::vector<int> idx(edges.size());
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = static_cast<int>(k);
    for (std::size_t k = 0; k < num_eg_outliers; ++k) {
      std::swap(idx[k], idx[k + rng.Below(idx.size() - k)]);
    }
    std::sort(idx.begin(), idx.begin() + num_eg_outliers);
    for (std::size_t k = 0; k < num_eg_outliers; ++k) {
      EgEdge& e = edges[idx[k]];
      e.r_ij = RandomRotation(rng);
      e.t_ij = UnitVector(rng.UnitSphere());
      manifest.eg_outliers.emplace_back(e.i, e.j);
    }
  }

  std::vector<std::pair<int, int>> slots;
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    for (std::size_t o = 0; o < tracks[t].length(); ++o) {
      slots.emplace_back(static_cast<int>(t), static_cast<int>(o));
    }
  }
  const auto num_obs_outliers = static_cast<std::size_t>(
      std::floor(noise.p_obs_outlier * static_cast<double>(slots.size())));
  if (num_obs_outliers > 0) {
    for (std::size_t k = 0; k < num_obs_outliers; ++k) {
      std::swap(slots[k], slots[k + rng.Below(slots.size() - k)]);
    }
    std::sort(slots.begin(), slots.begin() + num_obs_outliers);
    for (std::size_t k = 0; k < num_obs_outliers; ++k) {
      Observation& obs = tracks[slots[k].first].observations[slots[k].second];
      Vec3 d = rng.UnitSphere();
      d.z() = std::abs(d.z());
      obs.bearing = UnitVector(d);
      manifest.obs_outliers.emplace_back(slots[k].first, obs.camera_id);
    }
  }
  return manifest;
}

nlohmann::json SummarizeScene(const SimulatedScene& scene,
                              const SceneConfig& config) {
  const Dataset& ds = scene.dataset;
  std::size_t longest = 0;
  std::size_t total = 0;
  for (const FeatureTrack& t : ds.tracks) {
    longest = std::max(longest, t.length());
    total += t.length();
  }
  nlohmann::json out = {
      {"layout", ToString(config.layout)},
      {"cameras", ds.camera_ids.size()},
      {"egs", ds.graph.edges.size()},
      {"tracks", ds.tracks.size()},
      {"observations", total},
      {"longest_track", longest}};
  if (config.layout == Layout::kTwoCluster) {
    const int n_a = config.num_cameras / 2;
    int intra_a = 0;
    int intra_b = 0;
    int cross = 0;
    for (const EgEdge& e : ds.graph.edges) {
      const bool a_i = e.i < n_a;
      const bool a_j = e.j < n_a;
      if (a_i && a_j) {
        ++intra_a;
      } else if (!a_i && !a_j) {
        ++intra_b;
      } else {
        ++cross;
      }
    }
    const double pairs_a = 0.5 * n_a * (n_a - 1);
    const int n_b = config.num_cameras - n_a;
    const double pairs_b = 0.5 * n_b * (n_b - 1);
    out["blocks"] = {{"intra_a", intra_a},
                     {"intra_b", intra_b},
                     {"cross", cross},
                     {"density_a", pairs_a > 0 ? intra_a / pairs_a : 0.0},
                     {"density_b", pairs_b > 0 ? intra_b / pairs_b : 0.0},
                     {"density_cross",
                      static_cast<double>(cross) / (n_a * n_b)}};
  }
  return out;
}

}  // namespace transolve
