// SPDX-FileCopyrightText: 2026 The rigidflow authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "rigidflow/pcio.hpp"
#include "rigidflow/rng.hpp"

using namespace rigidflow;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("rigidflow_pcio_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static inline int counter = 0;
};

// Companion byte writer: packs float32 LE by hand, independent of the reader.
void append_f32(std::vector<std::uint8_t>& bytes, float f) {
  const auto u = std::bit_cast<std::uint32_t>(f);
  bytes.push_back(static_cast<std::uint8_t>(u & 0xff));
  bytes.push_back(static_cast<std::uint8_t>((u >> 8) & 0xff));
  bytes.push_back(static_cast<std::uint8_t>((u >> 16) & 0xff));
  bytes.push_back(static_cast<std::uint8_t>((u >> 24) & 0xff));
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
}

}  // namespace

TEST_CASE("velodyne bin reading") {
  TempDir dir;
  SUBCASE("two hand-packed records decode in order") {
    std::vector<std::uint8_t> bytes;
    for (float f : {1.0f, 2.0f, 3.0f, 0.5f, 4.0f, 5.0f, 6.0f, 0.0f}) append_f32(bytes, f);
    const fs::path file = dir.path / "two.bin";
    write_bytes(file, bytes);

    const PointCloud cloud = read_velodyne_bin(file);
    REQUIRE(cloud.size() == 2);
    CHECK(cloud.points[0] == Eigen::Vector3d(1, 2, 3));
    CHECK(cloud.reflectance[0] == 0.5);
    CHECK(cloud.points[1] == Eigen::Vector3d(4, 5, 6));
    CHECK(cloud.reflectance[1] == 0.0);
  }
  SUBCASE("empty file gives an empty cloud") {
    const fs::path file = dir.path / "empty.bin";
    write_bytes(file, {});
    CHECK(read_velodyne_bin(file).size() == 0);
  }
  SUBCASE("a 17-byte file is a format error") {
    const fs::path file = dir.path / "bad.bin";
    write_bytes(file, std::vector<std::uint8_t>(17, 0));
    CHECK_THROWS_AS(read_velodyne_bin(file), std::runtime_error);
  }
  SUBCASE("non-finite records are rejected with the point index") {
    std::vector<std::uint8_t> bytes;
    for (float f : {1.0f, 2.0f, 3.0f, 0.5f}) append_f32(bytes, f);
    append_f32(bytes, std::numeric_limits<float>::quiet_NaN());
    for (float f : {0.0f, 0.0f, 0.0f}) append_f32(bytes, f);
    const fs::path file = dir.path / "nan.bin";
    write_bytes(file, bytes);
    CHECK_THROWS_WITH_AS(read_velodyne_bin(file),
                         doctest::Contains("index 1"), std::runtime_error);
  }
  SUBCASE("missing files are reported") {
    CHECK_THROWS_AS(read_velodyne_bin(dir.path / "nope.bin"), std::runtime_error);
  }
}

TEST_CASE("velodyne bin writing") {
  TempDir dir;
  SUBCASE("random float clouds round trip bit exactly") {
    Rng rng(41);
    PointCloud cloud;
    for (int i = 0; i < 1000; ++i) {
      // float32-representable coordinates
      cloud.points.emplace_back(static_cast<float>(rng.uniform(-120, 120)),
                                static_cast<float>(rng.uniform(-120, 120)),
                                static_cast<float>(rng.uniform(-5, 5)));
      cloud.reflectance.push_back(static_cast<float>(rng.uniform(0, 1)));
    }
    const fs::path file = dir.path / "roundtrip.bin";
    write_velodyne_bin(cloud, file);
    const PointCloud back = read_velodyne_bin(file);
    REQUIRE(back.size() == cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      CHECK(back.points[i] == cloud.points[i]);
      CHECK(back.reflectance[i] == cloud.reflectance[i]);
    }
  }
  SUBCASE("an empty cloud writes an empty file") {
    const fs::path file = dir.path / "zero.bin";
    write_velodyne_bin(PointCloud{}, file);
    CHECK(fs::file_size(file) == 0);
    CHECK(read_velodyne_bin(file).size() == 0);
  }
  SUBCASE("missing reflectance is written as zero") {
    PointCloud cloud;
    cloud.points.emplace_back(1, 2, 3);
    const fs::path file = dir.path / "norefl.bin";
    write_velodyne_bin(cloud, file);
    CHECK(read_velodyne_bin(file).reflectance[0] == 0.0);
  }
  SUBCASE("NaN is rejected before anything is written") {
    PointCloud cloud;
    cloud.points.emplace_back(std::numeric_limits<double>::quiet_NaN(), 0, 0);
    CHECK_THROWS_AS(write_velodyne_bin(cloud, dir.path / "never.bin"),
                    std::invalid_argument);
  }
}

TEST_CASE("flow files round trip") {
  TempDir dir;
  FlowField flow;
  Rng rng(43);
  for (int i = 0; i < 256; ++i)
    flow.emplace_back(static_cast<float>(rng.uniform(-3, 3)),
                      static_cast<float>(rng.uniform(-3, 3)),
                      static_cast<float>(rng.uniform(-1, 1)));
  const fs::path file = dir.path / "flow.bin";
  write_flow_bin(flow, file);
  const FlowField back = read_flow_bin(file);
  REQUIRE(back.size() == flow.size());
  for (std::size_t i = 0; i < flow.size(); ++i) CHECK(back[i] == flow[i]);
}

namespace {

constexpr const char* kCubeObj = R"(# unit cube
mtllib cube.mtl
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
usemtl body
f 1 4 3 2
f 5 6 7 8
f 1 2 6 5
f 2 3 7 6
f 3 4 8 7
f 4 1 5 8
)";

constexpr const char* kCubeMtl = R"(newmtl body
d 1.0
newmtl glass
d 0.3
)";

}  // namespace

TEST_CASE("mesh reading") {
  TempDir dir;
  SUBCASE("a unit cube loads as 12 opaque triangles") {
    write_text_file(dir.path / "cube.obj", kCubeObj);
    write_text_file(dir.path / "cube.mtl", kCubeMtl);
    const TriangleMesh mesh = read_mesh(dir.path / "cube.obj");
    CHECK(mesh.vertices.size() == 8);
    CHECK(mesh.triangle_count() == 12);
    for (auto flag : mesh.transparent) CHECK(flag == 0);
    Eigen::Vector3d lo, hi;
    mesh.bounding_box(lo, hi);
    CHECK(lo == Eigen::Vector3d(0, 0, 0));
    CHECK(hi == Eigen::Vector3d(1, 1, 1));
  }
  SUBCASE("a quad face becomes two triangles (fan)") {
    write_text_file(dir.path / "quad.obj", "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
    const TriangleMesh mesh = read_mesh(dir.path / "quad.obj");
    REQUIRE(mesh.triangle_count() == 2);
    CHECK(mesh.triangles[0] == std::array<int, 3>{0, 1, 2});
    CHECK(mesh.triangles[1] == std::array<int, 3>{0, 2, 3});
  }
  SUBCASE("low-opacity materials flag their triangles transparent") {
    write_text_file(dir.path / "window.obj",
                    "mtllib win.mtl\nv 0 0 0\nv 1 0 0\nv 1 1 0\nusemtl glass\nf 1 2 3\n");
    write_text_file(dir.path / "win.mtl", "newmtl glass\nd 0.3\n");
    const TriangleMesh mesh = read_mesh(dir.path / "window.obj");
    REQUIRE(mesh.triangle_count() == 1);
    CHECK(mesh.transparent[0] == 1);
  }
  SUBCASE("face index syntax variants and negatives resolve") {
    write_text_file(dir.path / "idx.obj",
                    "v 0 0 0\nv 1 0 0\nv 1 1 0\nf 1/1 2//2 -1\n");
    const TriangleMesh mesh = read_mesh(dir.path / "idx.obj");
    REQUIRE(mesh.triangle_count() == 1);
    CHECK(mesh.triangles[0] == std::array<int, 3>{0, 1, 2});
  }
  SUBCASE("degenerate triangles are dropped at load") {
    write_text_file(dir.path / "degen.obj",
                    "v 0 0 0\nv 1 0 0\nv 2 0 0\nv 1 1 0\nf 1 2 3\nf 1 2 4\n");
    const TriangleMesh mesh = read_mesh(dir.path / "degen.obj");
    CHECK(mesh.triangle_count() == 1);
  }
  SUBCASE("dangling vertex indices are an error") {
    write_text_file(dir.path / "dangle.obj", "v 0 0 0\nv 1 0 0\nf 1 2 9\n");
    CHECK_THROWS_AS(read_mesh(dir.path / "dangle.obj"), std::runtime_error);
  }
  SUBCASE("unknown formats are an error") {
    write_text_file(dir.path / "mesh.ply", "ply\n");
    CHECK_THROWS_AS(read_mesh(dir.path / "mesh.ply"), std::runtime_error);
  }
}

TEST_CASE("scene pair manifests") {
  TempDir dir;
  AugmentedScenePair pair;
  Rng rng(47);
  for (int i = 0; i < 64; ++i) {
    pair.scan_t.points.emplace_back(static_cast<float>(rng.uniform(-10, 10)),
                                    static_cast<float>(rng.uniform(-10, 10)),
                                    static_cast<float>(rng.uniform(-2, 2)));
    pair.scan_t.reflectance.push_back(0.25);
    pair.flow.emplace_back(static_cast<float>(rng.uniform(-1, 1)), 0.0f, 0.0f);
  }
  pair.scan_t1 = pair.scan_t;

  OrientedBox box;
  box.center = {1.0, 2.0, 0.5};
  box.size = {4.0, 2.0, 1.5};
  box.yaw = 0.3;
  pair.boxes.push_back(box);
  pair.object_motions.push_back(PlanarRigidMotion::world(0.05, {1.25, -0.5}));
  pair.ego = PlanarRigidMotion::world(0.0, {0.0, 0.0});

  SUBCASE("write + read preserves the records") {
    const fs::path manifest = write_scene_pair(pair, dir.path / "pair");
    const AugmentedScenePair back = read_scene_pair(manifest);
    CHECK(back.scan_t.size() == pair.scan_t.size());
    CHECK(back.scan_t1.size() == pair.scan_t1.size());
    CHECK(back.flow.size() == pair.flow.size());
    REQUIRE(back.boxes.size() == 1);
    CHECK(back.boxes[0].center == box.center);
    CHECK(back.boxes[0].size == box.size);
    CHECK(back.boxes[0].yaw == box.yaw);
    CHECK(back.object_motions[0] == pair.object_motions[0]);
    CHECK(back.ego == pair.ego);
    CHECK(back.ego_mode == "identity");
    for (std::size_t i = 0; i < pair.flow.size(); ++i) CHECK(back.flow[i] == pair.flow[i]);
  }
  SUBCASE("missing referenced files fail at load") {
    const fs::path manifest = write_scene_pair(pair, dir.path / "pair2");
    fs::remove(dir.path / "pair2" / "scan_t1.bin");
    CHECK_THROWS_AS(read_manifest(manifest), std::runtime_error);
  }
}
