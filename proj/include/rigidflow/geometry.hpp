// SPDX-FileCopyrightText: 2026 The rigidflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace rigidflow {

// Point cloud in a named coordinate frame. The scanner sits at the frame
// origin. Reflectance is optional; when present it carries one value per
// point, nominally in [0, 1].
struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  std::vector<double> reflectance;  // empty when absent
  std::string frame_id = "sensor";

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_reflectance() const { return !reflectance.empty(); }
};

// Triangle soup with a per-triangle transparency flag. Transparent surfaces
// (window glass) never produce LIDAR returns and do not occlude.
struct TriangleMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::uint8_t> transparent;  // aligned with triangles

  std::size_t triangle_count() const { return triangles.size(); }
  void bounding_box(Eigen::Vector3d& lo, Eigen::Vector3d& hi) const;
};

// Ground-plane-oriented box: center, (length, width, height), yaw about the
// vertical axis and a detection score in [0, 1]. The footprint is the
// yaw-rotated l x w rectangle in the XY plane; height never enters the
// footprint tests.
struct OrientedBox {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d size = Eigen::Vector3d::Ones();  // (l, w, h)
  double yaw = 0.0;
  double score = 1.0;

  double footprint_area() const { return size.x() * size.y(); }
  std::array<Eigen::Vector2d, 4> footprint_corners() const;  // CCW order
  bool footprint_contains(const Eigen::Vector2d& p) const;
};

}  // namespace rigidflow
