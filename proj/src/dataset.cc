#include "transolve/dataset.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_map>

#include "transolve/error.h"

namespace transolve {

namespace {

using nlohmann::json;

void Indent(std::string* out, int indent, int depth) {
  if (indent < 0) return;
  out->push_back('\n');
  out->append(static_cast<std::size_t>(indent * depth), ' ');
}

void DumpValue(const json& j, int indent, int depth, std::string* out) {
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out->append("{}");
        return;
      }
      out->push_back('{');
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out->push_back(',');
        first = false;
        Indent(out, indent, depth + 1);
        out->append(json(it.key()).dump());
        out->append(indent < 0 ? ":" : ": ");
        DumpValue(it.value(), indent, depth + 1, out);
      }
      Indent(out, indent, depth);
      out->push_back('}');
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out->append("[]");
        return;
      }
      // Short numeric arrays (vectors, quaternions) stay on one line.
      const bool flat = j.size() <= 4 && std::all_of(j.begin(), j.end(),
                                                      [](const json& v) {
                                                        return v.is_number();
                                                      });
      out->push_back('[');
      bool first = true;
      for (const auto& v : j) {
        if (!first) out->append(flat && indent >= 0 ? ", " : ",");
        first = false;
        if (!flat) Indent(out, indent, depth + 1);
        DumpValue(v, indent, depth + 1, out);
      }
      if (!flat) Indent(out, indent, depth);
      out->push_back(']');
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out->append("null");
        return;
      }
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      std::string s(buf);
      // Keep the value typed as floating point on reload.
      if (s.find_first_of(".eEn") == std::string::npos) s.append(".0");
      out->append(s);
      return;
    }
    default:
      out->append(j.dump());
      return;
  }
}

[[noreturn]] void Fail(const std::string& what) {
  throw Error(ErrorCode::kInvalidInput, what);
}

Vec3 ReadVec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) Fail(std::string(what) + ": expected [x,y,z]");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

UnitVector ReadUnit(const json& j, const char* what) {
  const Vec3 v = ReadVec3(j, what);
  const double n = v.norm();
  if (!(n > 0.0)) Fail(std::string(what) + ": zero vector");
  if (std::abs(n - 1.0) > 1e-6) {
    std::cerr << "warning: " << what << " has norm " << n
              << ", renormalizing\n";
  }
  return UnitVector(v);
}

Rotation ReadQuaternion(const json& j) {
  if (!j.is_array() || j.size() != 4) Fail("rotation: expected [w,x,y,z]");
  const Eigen::Quaterniond q(j[0].get<double>(), j[1].get<double>(),
                             j[2].get<double>(), j[3].get<double>());
  if (!(q.norm() > 0.0)) Fail("rotation: zero quaternion");
  return Rotation(q);
}

}  // namespace

std::string DumpJson(const json& j, int indent) {
  std::string out;
  DumpValue(j, indent, 0, &out);
  if (indent >= 0) out.push_back('\n');
  return out;
}

json QuaternionToJson(const Rotation& r) {
  const auto& q = r.quaternion();
  return json::array({q.w(), q.x(), q.y(), q.z()});
}

json VecToJson(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json DatasetToJson(const Dataset& ds) {
  json j;
  json cams = json::array();
  for (int id : ds.camera_ids) cams.push_back({{"id", id}});
  j["cameras"] = std::move(cams);
  if (ds.rotations) {
    json rots = json::array();
    for (std::size_t k = 0; k < ds.rotations->size(); ++k) {
      rots.push_back({{"id", ds.camera_ids[k]},
                      {"q", QuaternionToJson((*ds.rotations)[k])}});
    }
    j["rotations"] = std::move(rots);
  }
  json egs = json::array();
  for (const EgEdge& e : ds.graph.edges) {
    egs.push_back({{"i", ds.camera_ids[e.i]},
                   {"j", ds.camera_ids[e.j]},
                   {"q", QuaternionToJson(e.r_ij)},
                   {"t", VecToJson(e.t_ij.vec())},
                   {"matches", e.matches}});
  }
  j["egs"] = std::move(egs);
  json tracks = json::array();
  for (const FeatureTrack& t : ds.tracks) {
    json obs = json::array();
    for (const Observation& o : t.observations) {
      obs.push_back({{"cam", ds.camera_ids[o.camera_id]},
                     {"bearing", VecToJson(o.bearing.vec())}});
    }
    tracks.push_back(std::move(obs));
  }
  j["tracks"] = std::move(tracks);
  return j;
}

Dataset DatasetFromJson(const json& j) {
  try {
    Dataset ds;
    std::unordered_map<int, int> index;
    for (const auto& c : j.at("cameras")) {
      const int id = c.at("id").get<int>();
      if (!index.emplace(id, static_cast<int>(ds.camera_ids.size())).second) {
        Fail("duplicate camera id " + std::to_string(id));
      }
      ds.camera_ids.push_back(id);
    }
    const int n = static_cast<int>(ds.camera_ids.size());
    auto lookup = [&](const json& v) {
      const int id = v.get<int>();
      const auto it = index.find(id);
      if (it == index.end()) Fail("unknown camera id " + std::to_string(id));
      return it->second;
    };

    if (j.contains("rotations")) {
      std::vector<std::optional<Rotation>> rots(n);
      for (const auto& r : j.at("rotations")) {
        rots[lookup(r.at("id"))] = ReadQuaternion(r.at("q"));
      }
      std::vector<Rotation> all;
      for (int k = 0; k < n; ++k) {
        if (!rots[k]) Fail("rotations must cover every camera");
        all.push_back(*rots[k]);
      }
      ds.rotations = std::move(all);
    }

    ds.graph.num_cameras = n;
    for (const auto& e : j.at("egs")) {
      EgEdge edge;
      int a = lookup(e.at("i"));
      int b = lookup(e.at("j"));
      Rotation r = ReadQuaternion(e.at("q"));
      UnitVector t = ReadUnit(e.at("t"), "EG translation");
      if (a > b) {
        // Store as i < j: R_ba = R_ab^T and t_ba = -R_ab^T t_ab.
        std::swap(a, b);
        t = UnitVector(-(r.inverse() * t.vec()));
        r = r.inverse();
      }
      edge.i = a;
      edge.j = b;
      edge.r_ij = r;
      edge.t_ij = t;
      edge.matches = e.value("matches", 0);
      ds.graph.edges.push_back(edge);
    }
    ValidateGraph(ds.graph);

    for (const auto& t : j.at("tracks")) {
      FeatureTrack track;
      for (const auto& o : t) {
        track.observations.push_back(
            {lookup(o.at("cam")), ReadUnit(o.at("bearing"), "bearing")});
      }
      for (std::size_t a = 0; a < track.length(); ++a) {
        for (std::size_t b = a + 1; b < track.length(); ++b) {
          if (track.observations[a].camera_id == track.observations[b].camera_id) {
            Fail("track observes the same camera twice");
          }
        }
      }
      ds.tracks.push_back(std::move(track));
    }
    return ds;
  } catch (const json::exception& e) {
    Fail(std::string("malformed dataset: ") + e.what());
  }
}

json TruthToJson(const GroundTruth& truth) {
  json j;
  json cams = json::array();
  for (std::size_t k = 0; k < truth.cameras.size(); ++k) {
    cams.push_back({{"id", truth.camera_ids[k]},
                    {"q", QuaternionToJson(truth.cameras[k].rotation)},
                    {"c", VecToJson(truth.cameras[k].center)}});
  }
  j["cameras"] = std::move(cams);
  json pts = json::array();
  for (const Vec3& p : truth.points) pts.push_back(VecToJson(p));
  j["points"] = std::move(pts);
  json eg = json::array();
  for (const auto& [a, b] : truth.manifest.eg_outliers) {
    eg.push_back({truth.camera_ids[a], truth.camera_ids[b]});
  }
  json obs = json::array();
  for (const auto& [t, c] : truth.manifest.obs_outliers) {
    obs.push_back({{"track", t}, {"cam", truth.camera_ids[c]}});
  }
  j["manifest"] = {{"eg_outliers", std::move(eg)},
                   {"obs_outliers", std::move(obs)}};
  j["config"] = truth.config;
  return j;
}

GroundTruth TruthFromJson(const json& j) {
  try {
    GroundTruth truth;
    std::unordered_map<int, int> index;
    for (const auto& c : j.at("cameras")) {
      const int id = c.at("id").get<int>();
      index.emplace(id, static_cast<int>(truth.camera_ids.size()));
      truth.camera_ids.push_back(id);
      truth.cameras.push_back(
          {ReadQuaternion(c.at("q")), ReadVec3(c.at("c"), "camera center")});
    }
    auto lookup = [&](const json& v) {
      const auto it = index.find(v.get<int>());
      if (it == index.end()) Fail("unknown camera id in manifest");
      return it->second;
    };
    if (j.contains("points")) {
      for (const auto& p : j.at("points")) {
        truth.points.push_back(ReadVec3(p, "point"));
      }
    }
    if (j.contains("manifest")) {
      const auto& m = j.at("manifest");
      for (const auto& e : m.value("eg_outliers", json::array())) {
        truth.manifest.eg_outliers.emplace_back(lookup(e.at(0)), lookup(e.at(1)));
      }
      for (const auto& o : m.value("obs_outliers", json::array())) {
        truth.manifest.obs_outliers.emplace_back(o.at("track").get<int>(),
                                                 lookup(o.at("cam")));
      }
    }
    truth.config = j.value("config", json::object());
    return truth;
  } catch (const json::exception& e) {
    Fail(std::string("malformed truth file: ") + e.what());
  }
}

std::vector<CameraPosition> PositionsFromJson(const json& j) {
  try {
    std::vector<CameraPosition> out;
    for (const auto& c : j.at("cameras")) {
      out.push_back({c.at("id").get<int>(), ReadVec3(c.at("c"), "position")});
    }
    return out;
  } catch (const json::exception& e) {
    Fail(std::string("malformed positions file: ") + e.what());
  }
}

json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    Fail(path + ": " + e.what());
  }
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail("cannot write " + path);
  out << text;
  if (!out) Fail("write failed: " + path);
}

void WritePly(const std::vector<CameraPosition>& positions,
              const std::string& path) {
  std::ostringstream out;
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << positions.size() << '\n';
  out << "property double x\nproperty double y\nproperty double z\n";
  out << "end_header\n";
  char buf[96];
  for (const CameraPosition& p : positions) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", p.center.x(),
                  p.center.y(), p.center.z());
    out << buf;
  }
  WriteTextFile(path, out.str());
}

}  // namespace transolve
