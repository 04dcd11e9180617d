// SPDX-FileCopyrightText: 2026 The rigidflow authors
// SPDX-License-Identifier: Apache-2.0

#include "rigidflow/pcio.hpp"

#include <Eigen/Geometry>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace rigidflow {

namespace {

using nlohmann::json;

std::vector<std::uint8_t> read_all_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const std::streamoff len = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(len));
  if (len > 0) in.read(reinterpret_cast<char*>(bytes.data()), len);
  if (!in) throw std::runtime_error("read failed for " + path.string());
  return bytes;
}

float decode_f32le(const std::uint8_t* b) {
  const std::uint32_t u = static_cast<std::uint32_t>(b[0]) |
                          static_cast<std::uint32_t>(b[1]) << 8 |
                          static_cast<std::uint32_t>(b[2]) << 16 |
                          static_cast<std::uint32_t>(b[3]) << 24;
  return std::bit_cast<float>(u);
}

void encode_f32le(float f, std::uint8_t* b) {
  const std::uint32_t u = std::bit_cast<std::uint32_t>(f);
  b[0] = static_cast<std::uint8_t>(u & 0xff);
  b[1] = static_cast<std::uint8_t>((u >> 8) & 0xff);
  b[2] = static_cast<std::uint8_t>((u >> 16) & 0xff);
  b[3] = static_cast<std::uint8_t>((u >> 24) & 0xff);
}

float to_f32_checked(double v, const char* what, std::size_t index) {
  if (!std::isfinite(v))
    throw std::invalid_argument(std::string(what) + " not finite at index " +
                                std::to_string(index));
  const float f = static_cast<float>(v);
  if (!std::isfinite(f))
    throw std::invalid_argument(std::string(what) + " overflows float32 at index " +
                                std::to_string(index));
  return f;
}

void write_all_bytes(const std::filesystem::path& path,
                     const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  if (!bytes.empty())
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

PointCloud read_velodyne_bin(const std::filesystem::path& path) {
  const auto bytes = read_all_bytes(path);
  if (bytes.size() % 16 != 0)
    throw std::runtime_error("truncated scan " + path.string() + ": " +
                             std::to_string(bytes.size()) +
                             " bytes, trailing record at byte offset " +
                             std::to_string(bytes.size() - bytes.size() % 16));
  const std::size_t n = bytes.size() / 16;
  PointCloud cloud;
  cloud.points.reserve(n);
  cloud.reflectance.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* rec = bytes.data() + i * 16;
    const float x = decode_f32le(rec);
    const float y = decode_f32le(rec + 4);
    const float z = decode_f32le(rec + 8);
    const float r = decode_f32le(rec + 12);
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z) || !std::isfinite(r))
      throw std::runtime_error("non-finite value in " + path.string() +
                               " at point index " + std::to_string(i));
    cloud.points.emplace_back(x, y, z);
    cloud.reflectance.push_back(r);
  }
  return cloud;
}

void write_velodyne_bin(const PointCloud& cloud, const std::filesystem::path& path) {
  if (cloud.has_reflectance() && cloud.reflectance.size() != cloud.points.size())
    throw std::invalid_argument("reflectance length does not match point count");
  std::vector<std::uint8_t> bytes(cloud.size() * 16);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d& p = cloud.points[i];
    const double refl = cloud.has_reflectance() ? cloud.reflectance[i] : 0.0;
    std::uint8_t* rec = bytes.data() + i * 16;
    encode_f32le(to_f32_checked(p.x(), "x", i), rec);
    encode_f32le(to_f32_checked(p.y(), "y", i), rec + 4);
    encode_f32le(to_f32_checked(p.z(), "z", i), rec + 8);
    encode_f32le(to_f32_checked(refl, "reflectance", i), rec + 12);
  }
  write_all_bytes(path, bytes);
}

FlowField read_flow_bin(const std::filesystem::path& path) {
  const auto bytes = read_all_bytes(path);
  if (bytes.size() % 12 != 0)
    throw std::runtime_error("truncated flow file " + path.string() + ": " +
                             std::to_string(bytes.size()) + " bytes");
  const std::size_t n = bytes.size() / 12;
  FlowField flow;
  flow.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* rec = bytes.data() + i * 12;
    const float x = decode_f32le(rec);
    const float y = decode_f32le(rec + 4);
    const float z = decode_f32le(rec + 8);
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
      throw std::runtime_error("non-finite flow in " + path.string() + " at index " +
                               std::to_string(i));
    flow.emplace_back(x, y, z);
  }
  return flow;
}

void write_flow_bin(const FlowField& flow, const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes(flow.size() * 12);
  for (std::size_t i = 0; i < flow.size(); ++i) {
    std::uint8_t* rec = bytes.data() + i * 12;
    encode_f32le(to_f32_checked(flow[i].x(), "flow x", i), rec);
    encode_f32le(to_f32_checked(flow[i].y(), "flow y", i), rec + 4);
    encode_f32le(to_f32_checked(flow[i].z(), "flow z", i), rec + 8);
  }
  write_all_bytes(path, bytes);
}

namespace {

// Opacity per material name from an MTL sidecar. `d` is opacity, `Tr` its
// complement; the last one seen wins, matching common exporters.
std::map<std::string, double> read_mtl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open material file " + path.string());
  std::map<std::string, double> opacity;
  std::string line, current;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    if (tag == "newmtl") {
      ss >> current;
      opacity[current] = 1.0;
    } else if (tag == "d" && !current.empty()) {
      double d = 1.0;
      if (ss >> d) opacity[current] = d;
    } else if (tag == "Tr" && !current.empty()) {
      double tr = 0.0;
      if (ss >> tr) opacity[current] = 1.0 - tr;
    }
  }
  return opacity;
}

int resolve_obj_index(const std::string& token, std::size_t n_vertices,
                      const std::filesystem::path& path) {
  // face tokens look like "7", "7/1" or "7//3"; negative values are relative
  const std::string head = token.substr(0, token.find('/'));
  long idx = 0;
  try {
    idx = std::stol(head);
  } catch (const std::exception&) {
    throw std::runtime_error("bad face index '" + token + "' in " + path.string());
  }
  if (idx < 0) idx = static_cast<long>(n_vertices) + 1 + idx;
  if (idx < 1 || idx > static_cast<long>(n_vertices))
    throw std::runtime_error("dangling vertex index " + head + " in " + path.string());
  return static_cast<int>(idx - 1);
}

}  // namespace

TriangleMesh read_mesh(const std::filesystem::path& path) {
  if (path.extension() != ".obj")
    throw std::runtime_error("unsupported mesh format: " + path.string());
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());

  TriangleMesh mesh;
  std::map<std::string, double> materials;
  double current_opacity = 1.0;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    if (tag == "v") {
      double x = 0, y = 0, z = 0;
      if (!(ss >> x >> y >> z))
        throw std::runtime_error("bad vertex line in " + path.string());
      mesh.vertices.emplace_back(x, y, z);
    } else if (tag == "mtllib") {
      std::string name;
      ss >> name;
      materials = read_mtl(path.parent_path() / name);
    } else if (tag == "usemtl") {
      std::string name;
      ss >> name;
      const auto it = materials.find(name);
      current_opacity = it == materials.end() ? 1.0 : it->second;
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string token;
      while (ss >> token)
        poly.push_back(resolve_obj_index(token, mesh.vertices.size(), path));
      if (poly.size() < 3)
        throw std::runtime_error("face with fewer than 3 vertices in " + path.string());
      for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
        const std::array<int, 3> tri{poly[0], poly[i], poly[i + 1]};
        const Eigen::Vector3d& a = mesh.vertices[tri[0]];
        const Eigen::Vector3d& b = mesh.vertices[tri[1]];
        const Eigen::Vector3d& c = mesh.vertices[tri[2]];
        if ((b - a).cross(c - a).norm() <= 1e-12) continue;  // degenerate
        mesh.triangles.push_back(tri);
        mesh.transparent.push_back(current_opacity < 1.0 ? 1 : 0);
      }
    }
    // vn/vt/o/g/s and comments are ignored
  }
  return mesh;
}

namespace {

json motion_to_json(const PlanarRigidMotion& m) {
  return json{{"theta", m.theta}, {"tx", m.t.x()}, {"ty", m.t.y()}};
}

PlanarRigidMotion motion_from_json(const json& j) {
  return PlanarRigidMotion::world(j.at("theta").get<double>(),
                                  {j.at("tx").get<double>(), j.at("ty").get<double>()});
}

std::filesystem::path resolve_and_check(const std::filesystem::path& base,
                                        const std::string& rel) {
  std::filesystem::path p(rel);
  if (p.is_relative()) p = base / p;
  if (!std::filesystem::exists(p))
    throw std::runtime_error("manifest references missing file " + p.string());
  return p;
}

}  // namespace

SceneManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path.string());
  json j;
  in >> j;

  const std::filesystem::path base = path.parent_path();
  SceneManifest m;
  m.scan_t = resolve_and_check(base, j.at("scan_t").get<std::string>());
  m.scan_t1 = resolve_and_check(base, j.at("scan_t1").get<std::string>());
  if (j.contains("flow") && !j.at("flow").is_null())
    m.flow = resolve_and_check(base, j.at("flow").get<std::string>());
  m.ego = motion_from_json(j.at("ego"));
  if (j.contains("ego_mode")) m.ego_mode = j.at("ego_mode").get<std::string>();
  for (const auto& jo : j.at("objects")) {
    ObjectRecord rec;
    const auto& c = jo.at("center");
    const auto& s = jo.at("size");
    rec.box.center = {c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()};
    rec.box.size = {s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>()};
    rec.box.yaw = jo.at("yaw").get<double>();
    rec.box.score = jo.value("score", 1.0);
    rec.motion = motion_from_json(jo.at("motion"));
    m.objects.push_back(rec);
  }
  return m;
}

void write_manifest(const SceneManifest& manifest, const std::filesystem::path& path) {
  json objects = json::array();
  for (const auto& rec : manifest.objects) {
    objects.push_back(
        {{"center", {rec.box.center.x(), rec.box.center.y(), rec.box.center.z()}},
         {"size", {rec.box.size.x(), rec.box.size.y(), rec.box.size.z()}},
         {"yaw", rec.box.yaw},
         {"score", rec.box.score},
         {"motion", motion_to_json(rec.motion)}});
  }
  json j{{"scan_t", manifest.scan_t.filename().string()},
         {"scan_t1", manifest.scan_t1.filename().string()},
         {"ego", motion_to_json(manifest.ego)},
         {"ego_mode", manifest.ego_mode},
         {"objects", objects}};
  if (manifest.flow) j["flow"] = manifest.flow->filename().string();

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

AugmentedScenePair read_scene_pair(const std::filesystem::path& manifest_path) {
  const SceneManifest m = read_manifest(manifest_path);
  AugmentedScenePair pair;
  pair.scan_t = read_velodyne_bin(m.scan_t);
  pair.scan_t1 = read_velodyne_bin(m.scan_t1);
  if (m.flow) {
    pair.flow = read_flow_bin(*m.flow);
    if (pair.flow.size() != pair.scan_t.size())
      throw std::runtime_error("flow length does not match scan_t in " +
                               manifest_path.string());
  }
  pair.ego = m.ego;
  pair.ego_mode = m.ego_mode;
  for (const auto& rec : m.objects) {
    pair.boxes.push_back(rec.box);
    pair.object_motions.push_back(rec.motion);
  }
  return pair;
}

std::filesystem::path write_scene_pair(const AugmentedScenePair& pair,
                                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_velodyne_bin(pair.scan_t, dir / "scan_t.bin");
  write_velodyne_bin(pair.scan_t1, dir / "scan_t1.bin");

  SceneManifest m;
  m.scan_t = dir / "scan_t.bin";
  m.scan_t1 = dir / "scan_t1.bin";
  if (!pair.flow.empty()) {
    write_flow_bin(pair.flow, dir / "flow.bin");
    m.flow = dir / "flow.bin";
  }
  m.ego = pair.ego;
  m.ego_mode = pair.ego_mode;
  for (std::size_t i = 0; i < pair.boxes.size(); ++i)
    m.objects.push_back({pair.boxes[i], pair.object_motions[i]});
  const std::filesystem::path manifest_path = dir / "manifest.json";
  write_manifest(m, manifest_path);
  return manifest_path;
}

}  // namespace rigidflow
