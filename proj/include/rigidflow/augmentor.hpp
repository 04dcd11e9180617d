// SPDX-FileCopyrightText: 2026 The rigidflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "rigidflow/geometry.hpp"
#include "rigidflow/pcio.hpp"
#include "rigidflow/rigidmotion.hpp"
#include "rigidflow/rng.hpp"

namespace rigidflow {

// Plane n.x = d with unit upward normal; inliers satisfy |n.x - d| <= threshold.
struct GroundPlane {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double offset = 0.0;
  std::vector<int> inliers;
  double inlier_threshold = 0.0;

  double height_above(const Eigen::Vector3d& p) const { return normal.dot(p) - offset; }
  double height_at(const Eigen::Vector2d& xy) const {
    return (offset - normal.x() * xy.x() - normal.y() * xy.y()) / normal.z();
  }
};

// RANSAC plane fit: best consensus over `iters` random 3-point hypotheses,
// refined by least squares on the consensus inliers. Deterministic per seed.
GroundPlane ransac_ground(const PointCloud& cloud, int iters, double inlier_thresh,
                          std::uint64_t rng_seed);

// Ground-plane occupancy: a cell is drivable when it contains ground inliers
// and nothing in the obstacle height band above the plane.
struct OccupancyMap2D {
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  double cell = 0.5;
  int nx = 0, ny = 0;
  std::vector<std::uint8_t> drivable;

  bool in_bounds(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }
  bool is_drivable(const Eigen::Vector2d& p) const;
  Eigen::Vector2d cell_center(int i, int j) const {
    return origin + Eigen::Vector2d((i + 0.5) * cell, (j + 0.5) * cell);
  }
  int drivable_count() const;
};

OccupancyMap2D drivable_region(const PointCloud& cloud, const GroundPlane& plane,
                               double cell, double obstacle_low = 0.3,
                               double obstacle_high = 2.5);

// Velodyne-class scanning lattice plus a range-linear noise model
// sigma(r) = noise_a + noise_b * r and a per-return dropout probability.
// Noise draws are keyed on (rng_seed, ray index).
struct SensorModel {
  double azimuth_resolution = 0.2 * kPi / 180.0;
  std::vector<double> elevations;  // radians
  double noise_a = 0.01;
  double noise_b = 0.001;
  double dropout = 0.02;
  double max_range = 120.0;
  std::uint64_t rng_seed = 0;

  double sigma(double range) const { return noise_a + noise_b * range; }
  bool valid() const;
  static SensorModel velodyne64();  // 64 channels over [-24.8 deg, +2 deg]
};

struct PlacedCar {
  int mesh_id = 0;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();  // footprint center, XY
  double yaw = 0.0;
  PlanarRigidMotion motion;  // world-tagged motion t -> t+1
};

struct AugmentorConfig {
  int min_cars = 1;
  int max_cars = 3;
  double speed_min = 1.0, speed_max = 15.0;        // m/s
  double curvature_min = -0.2, curvature_max = 0.2;  // 1/m
  double dt = 0.1;                                 // s between frames
  double region_cell = 0.5;
  int ransac_iters = 200;
  double ransac_thresh = 0.15;
  double obstacle_low = 0.3, obstacle_high = 2.5;
  double placement_margin = 0.2;  // footprint inflation for clearance tests
  int max_place_attempts = 1000;
  bool sample_ego = false;        // identity ego unless set
};

// Circular-arc vehicle motion: speed s and curvature kappa drawn uniformly,
// heading change theta = s * kappa * dt, translation the chord of the arc in
// the car frame ((sin theta)/kappa, (1 - cos theta)/kappa), straight-line
// motion when kappa = 0. The result is local-tagged at the origin of the car
// frame; the caller rotates it into world by the car yaw.
PlanarRigidMotion ackermann_sample(double speed_min, double speed_max,
                                   double curvature_min, double curvature_max,
                                   double dt, std::uint64_t rng_seed);
PlanarRigidMotion ackermann_sample(double speed_min, double speed_max,
                                   double curvature_min, double curvature_max,
                                   double dt, Rng& rng);

// Rejection-samples k car poses on drivable cells with pairwise-disjoint,
// fully drivable footprints, and draws a motion for each. Throws after
// cfg.max_place_attempts failed attempts.
std::vector<PlacedCar> place_cars(const OccupancyMap2D& region,
                                  const std::vector<TriangleMesh>& meshes, int k,
                                  std::uint64_t rng_seed, const AugmentorConfig& cfg);

// Simulated scan: one return per lattice ray hitting an opaque triangle
// (nearest hit, range perturbed by sigma(r), dropped with the dropout
// probability; transparent triangles neither return nor occlude), plus the
// original points whose sensor ray is not blocked by an opaque triangle
// strictly before the point. Surviving originals come first, simulated
// returns after, in lattice order.
struct ScanResult {
  PointCloud cloud;
  std::vector<int> removed_indices;  // indices into the original cloud, ascending
  int simulated_begin = 0;           // first simulated return in cloud
};
ScanResult raycast_scan(const std::vector<TriangleMesh>& meshes,
                        const PointCloud& original, const SensorModel& sensor);

// Full augmentation workflow: ground plane, drivable region, car placement,
// two simulated frames with each car advanced by its sampled motion, and the
// ground truth assembled into a scene pair.
AugmentedScenePair make_pair(const PointCloud& scene,
                             const std::vector<TriangleMesh>& mesh_library,
                             const SensorModel& sensor, const AugmentorConfig& cfg,
                             std::uint64_t rng_seed);

}  // namespace rigidflow
