// SPDX-FileCopyrightText: 2026 The rigidflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rigidflow/geometry.hpp"
#include "rigidflow/rigidmotion.hpp"

namespace rigidflow {

// One annotated object: its box at frame t and its planar motion to t+1,
// expressed about the world origin.
struct ObjectRecord {
  OrientedBox box;
  PlanarRigidMotion motion;
};

// On-disk description of a scan pair with ground truth. Paths are resolved
// against the manifest's directory on load and are checked to exist.
//
// Ego convention: `ego` is the pose of sensor frame t+1 expressed in frame t.
// A static point p observed at frame t appears at R(ego.theta)^T (p - ego.t)
// in the next scan, so its flow is R^T (p - ego.t) - p. Object motions are
// stored as apparent motions in the same measurement space (what a matcher
// recovers between the two scans); with identity ego they coincide with the
// world motions.
struct SceneManifest {
  std::filesystem::path scan_t;
  std::filesystem::path scan_t1;
  std::optional<std::filesystem::path> flow;
  std::vector<ObjectRecord> objects;
  PlanarRigidMotion ego;
  std::string ego_mode = "identity";  // "identity" or "sampled"
};

// Fully loaded scan pair: two scans, per-point ground-truth flow for scan_t,
// object boxes + motions, and the ego record.
struct AugmentedScenePair {
  PointCloud scan_t;
  PointCloud scan_t1;
  std::vector<OrientedBox> boxes;
  std::vector<PlanarRigidMotion> object_motions;  // aligned with boxes
  PlanarRigidMotion ego;
  std::string ego_mode = "identity";
  FlowField flow;  // one vector per point of scan_t; may be empty
};

// KITTI-style binary scan: N records of four float32 LE (x, y, z,
// reflectance). Round trips are bit exact for float-representable values.
PointCloud read_velodyne_bin(const std::filesystem::path& path);
void write_velodyne_bin(const PointCloud& cloud, const std::filesystem::path& path);

// Ground-truth flow file: N records of three float32 LE.
FlowField read_flow_bin(const std::filesystem::path& path);
void write_flow_bin(const FlowField& flow, const std::filesystem::path& path);

// Wavefront OBJ with optional MTL sidecar. Polygons are fan-triangulated,
// zero-area triangles dropped, and a triangle is flagged transparent when its
// material opacity (`d`, or 1 - `Tr`) is below 1.
TriangleMesh read_mesh(const std::filesystem::path& path);

SceneManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const SceneManifest& manifest, const std::filesystem::path& path);

// Reads/writes a whole pair directory: scan_t.bin, scan_t1.bin, flow.bin and
// manifest.json.
AugmentedScenePair read_scene_pair(const std::filesystem::path& manifest_path);
std::filesystem::path write_scene_pair(const AugmentedScenePair& pair,
                                       const std::filesystem::path& dir);

}  // namespace rigidflow
