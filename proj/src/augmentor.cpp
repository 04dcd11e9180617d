// SPDX-FileCopyrightText: 2026 The rigidflow authors
// SPDX-License-Identifier: Apache-2.0

#include "rigidflow/augmentor.hpp"

#include <Eigen/Geometry>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bvh.hpp"
#include "rigidflow/decoder.hpp"

namespace rigidflow {

GroundPlane ransac_ground(const PointCloud& cloud, int iters, double inlier_thresh,
                          std::uint64_t rng_seed) {
  const int n = static_cast<int>(cloud.size());
  if (n < 3) throw std::invalid_argument("ransac_ground: need at least 3 points");
  if (iters < 1 || inlier_thresh <= 0.0)
    throw std::invalid_argument("ransac_ground: bad parameters");

  Rng rng(mix_seed(rng_seed, 0x67726e64ULL));
  Eigen::Vector3d best_n = Eigen::Vector3d::UnitZ();
  double best_d = 0.0;
  int best_count = -1;

  for (int it = 0; it < iters; ++it) {
    const int ia = rng.uniform_int(0, n - 1);
    const int ib = rng.uniform_int(0, n - 1);
    const int ic = rng.uniform_int(0, n - 1);
    if (ia == ib || ib == ic || ia == ic) continue;
    const Eigen::Vector3d& a = cloud.points[ia];
    Eigen::Vector3d normal =
        (cloud.points[ib] - a).cross(cloud.points[ic] - a);
    const double len = normal.norm();
    if (len < 1e-12) continue;  // collinear sample
    normal /= len;
    const double d = normal.dot(a);

    int count = 0;
    for (const auto& p : cloud.points)
      if (std::abs(normal.dot(p) - d) <= inlier_thresh) ++count;
    if (count > best_count) {
      best_count = count;
      best_n = normal;
      best_d = d;
    }
  }
  if (best_count < 3)
    throw std::runtime_error("ransac_ground: no plane hypothesis found");

  // Least-squares refinement on the consensus inliers: plane through their
  // centroid, normal the smallest-eigenvalue direction of the scatter.
  std::vector<int> consensus;
  for (int i = 0; i < n; ++i)
    if (std::abs(best_n.dot(cloud.points[i]) - best_d) <= inlier_thresh)
      consensus.push_back(i);

  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (int i : consensus) centroid += cloud.points[i];
  centroid /= static_cast<double>(consensus.size());

  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (int i : consensus) {
    const Eigen::Vector3d d = cloud.points[i] - centroid;
    scatter += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter);
  Eigen::Vector3d normal = eig.eigenvectors().col(0);
  if (normal.norm() > 0.0) normal.normalize();

  GroundPlane plane;
  plane.normal = normal.z() < 0.0 ? Eigen::Vector3d(-normal) : normal;
  plane.offset = plane.normal.dot(centroid);
  plane.inlier_threshold = inlier_thresh;
  for (int i = 0; i < n; ++i)
    if (std::abs(plane.height_above(cloud.points[i])) <= inlier_thresh)
      plane.inliers.push_back(i);
  return plane;
}

bool OccupancyMap2D::is_drivable(const Eigen::Vector2d& p) const {
  const int i = static_cast<int>(std::floor((p.x() - origin.x()) / cell));
  const int j = static_cast<int>(std::floor((p.y() - origin.y()) / cell));
  return in_bounds(i, j) && drivable[static_cast<std::size_t>(j) * nx + i] != 0;
}

int OccupancyMap2D::drivable_count() const {
  int count = 0;
  for (auto v : drivable) count += v != 0 ? 1 : 0;
  return count;
}

OccupancyMap2D drivable_region(const PointCloud& cloud, const GroundPlane& plane,
                               double cell, double obstacle_low, double obstacle_high) {
  OccupancyMap2D map;
  map.cell = cell;
  if (cloud.empty()) return map;

  Eigen::Vector2d lo(cloud.points[0].head<2>()), hi(cloud.points[0].head<2>());
  for (const auto& p : cloud.points) {
    lo = lo.cwiseMin(p.head<2>());
    hi = hi.cwiseMax(p.head<2>());
  }
  map.origin = lo;
  map.nx = static_cast<int>(std::floor((hi.x() - lo.x()) / cell)) + 1;
  map.ny = static_cast<int>(std::floor((hi.y() - lo.y()) / cell)) + 1;

  std::vector<std::uint8_t> has_ground(static_cast<std::size_t>(map.nx) * map.ny, 0);
  std::vector<std::uint8_t> has_obstacle(has_ground.size(), 0);
  for (const auto& p : cloud.points) {
    const int i = static_cast<int>(std::floor((p.x() - map.origin.x()) / cell));
    const int j = static_cast<int>(std::floor((p.y() - map.origin.y()) / cell));
    if (!map.in_bounds(i, j)) continue;
    const std::size_t at = static_cast<std::size_t>(j) * map.nx + i;
    const double h = plane.height_above(p);
    if (std::abs(h) <= plane.inlier_threshold) has_ground[at] = 1;
    if (h >= obstacle_low && h <= obstacle_high) has_obstacle[at] = 1;
  }
  map.drivable.resize(has_ground.size());
  for (std::size_t idx = 0; idx < has_ground.size(); ++idx)
    map.drivable[idx] = has_ground[idx] != 0 && has_obstacle[idx] == 0 ? 1 : 0;
  return map;
}

bool SensorModel::valid() const {
  return azimuth_resolution > 0.0 && !elevations.empty() && noise_a >= 0.0 &&
         noise_b >= 0.0 && dropout >= 0.0 && dropout < 1.0 && max_range > 0.0;
}

SensorModel SensorModel::velodyne64() {
  SensorModel sensor;
  const double lo = -24.8 * kPi / 180.0;
  const double hi = 2.0 * kPi / 180.0;
  sensor.elevations.resize(64);
  for (int i = 0; i < 64; ++i)
    sensor.elevations[i] = lo + (hi - lo) * static_cast<double>(i) / 63.0;
  return sensor;
}

PlanarRigidMotion ackermann_sample(double speed_min, double speed_max,
                                   double curvature_min, double curvature_max,
                                   double dt, Rng& rng) {
  if (dt <= 0.0) throw std::invalid_argument("ackermann_sample: dt must be positive");
  const double speed = rng.uniform(speed_min, speed_max);
  const double curvature = rng.uniform(curvature_min, curvature_max);
  const double theta = speed * curvature * dt;
  Eigen::Vector2d chord;
  if (curvature == 0.0) {
    chord = {speed * dt, 0.0};
  } else {
    chord = {std::sin(theta) / curvature, (1.0 - std::cos(theta)) / curvature};
  }
  return PlanarRigidMotion::local(theta, chord, Eigen::Vector2d::Zero());
}

PlanarRigidMotion ackermann_sample(double speed_min, double speed_max,
                                   double curvature_min, double curvature_max,
                                   double dt, std::uint64_t rng_seed) {
  Rng rng(mix_seed(rng_seed, 0x61636b72ULL));
  return ackermann_sample(speed_min, speed_max, curvature_min, curvature_max, dt, rng);
}

namespace {

OrientedBox footprint_box(const TriangleMesh& model, const Eigen::Vector2d& position,
                          double yaw, double inflation) {
  Eigen::Vector3d lo, hi;
  model.bounding_box(lo, hi);
  OrientedBox box;
  box.center = {position.x(), position.y(), 0.0};
  box.size = {hi.x() - lo.x() + 2.0 * inflation, hi.y() - lo.y() + 2.0 * inflation,
              std::max(1e-6, hi.z() - lo.z())};
  box.yaw = yaw;
  return box;
}

bool footprint_on_drivable(const OccupancyMap2D& region, const OrientedBox& box) {
  // every region cell overlapped by the footprint must be drivable; cell
  // centers are tested against the footprint inflated by the cell radius
  OrientedBox probe = box;
  probe.size.x() += region.cell * 1.4142135623730951;
  probe.size.y() += region.cell * 1.4142135623730951;
  const auto corners = probe.footprint_corners();
  Eigen::Vector2d lo = corners[0], hi = corners[0];
  for (const auto& c : corners) {
    lo = lo.cwiseMin(c);
    hi = hi.cwiseMax(c);
  }
  const int i0 = static_cast<int>(std::floor((lo.x() - region.origin.x()) / region.cell));
  const int j0 = static_cast<int>(std::floor((lo.y() - region.origin.y()) / region.cell));
  const int i1 = static_cast<int>(std::floor((hi.x() - region.origin.x()) / region.cell));
  const int j1 = static_cast<int>(std::floor((hi.y() - region.origin.y()) / region.cell));
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      const Eigen::Vector2d center =
          region.origin + Eigen::Vector2d((i + 0.5) * region.cell, (j + 0.5) * region.cell);
      if (!probe.footprint_contains(center)) continue;
      if (!region.in_bounds(i, j) ||
          region.drivable[static_cast<std::size_t>(j) * region.nx + i] == 0)
        return false;
    }
  }
  return true;
}

}  // namespace

std::vector<PlacedCar> place_cars(const OccupancyMap2D& region,
                                  const std::vector<TriangleMesh>& meshes, int k,
                                  std::uint64_t rng_seed, const AugmentorConfig& cfg) {
  if (meshes.empty()) throw std::invalid_argument("place_cars: no meshes");
  if (k < 1) throw std::invalid_argument("place_cars: k must be >= 1");

  std::vector<int> drivable_cells;
  for (int j = 0; j < region.ny; ++j)
    for (int i = 0; i < region.nx; ++i)
      if (region.drivable[static_cast<std::size_t>(j) * region.nx + i] != 0)
        drivable_cells.push_back(j * region.nx + i);
  if (drivable_cells.empty())
    throw std::runtime_error("place_cars: region has no drivable cells");

  Rng rng(mix_seed(rng_seed, 0x706c6163ULL));
  std::vector<PlacedCar> cars;
  std::vector<OrientedBox> claimed;
  int attempts = 0;

  while (static_cast<int>(cars.size()) < k) {
    if (attempts >= cfg.max_place_attempts)
      throw std::runtime_error("place_cars: placement exhausted after " +
                               std::to_string(attempts) + " attempts");
    ++attempts;

    const int cell_id = drivable_cells[rng.uniform_int(0, static_cast<int>(drivable_cells.size()) - 1)];
    const int ci = cell_id % region.nx;
    const int cj = cell_id / region.nx;
    const Eigen::Vector2d position =
        region.cell_center(ci, cj) +
        Eigen::Vector2d(rng.uniform(-0.5, 0.5) * region.cell,
                        rng.uniform(-0.5, 0.5) * region.cell);
    const double yaw = rng.uniform(-kPi, kPi);
    const int mesh_id = rng.uniform_int(0, static_cast<int>(meshes.size()) - 1);

    const OrientedBox footprint =
        footprint_box(meshes[mesh_id], position, yaw, cfg.placement_margin);
    if (!footprint_on_drivable(region, footprint)) continue;
    bool overlaps = false;
    for (const auto& other : claimed)
      if (ground_iou(footprint, other) > 0.0) {
        overlaps = true;
        break;
      }
    if (overlaps) continue;

    PlacedCar car;
    car.mesh_id = mesh_id;
    car.position = position;
    car.yaw = yaw;
    const PlanarRigidMotion arc = ackermann_sample(
        cfg.speed_min, cfg.speed_max, cfg.curvature_min, cfg.curvature_max, cfg.dt, rng);
    const Eigen::Vector2d chord_world = rot2(yaw) * arc.t;
    car.motion = local_to_world(PlanarRigidMotion::local(arc.theta, chord_world, position));
    cars.push_back(car);
    claimed.push_back(footprint);
  }
  return cars;
}

ScanResult raycast_scan(const std::vector<TriangleMesh>& meshes,
                        const PointCloud& original, const SensorModel& sensor) {
  if (!sensor.valid()) throw std::invalid_argument("raycast_scan: invalid sensor model");

  std::vector<BvhTriangle> opaque;
  for (const auto& mesh : meshes) {
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      if (mesh.transparent[t] != 0) continue;
      const auto& tri = mesh.triangles[t];
      opaque.push_back({mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]});
    }
  }

  ScanResult result;
  result.cloud.frame_id = original.frame_id;

  if (opaque.empty()) {
    result.cloud = original;
    result.simulated_begin = static_cast<int>(original.size());
    return result;
  }

  const TriangleBvh bvh(std::move(opaque));

  // occlusion pass: drop originals whose ray hits an opaque triangle strictly
  // before the point itself
  for (int i = 0; i < static_cast<int>(original.size()); ++i) {
    const Eigen::Vector3d& p = original.points[i];
    if (p.squaredNorm() > 0.0 && bvh.any_hit_before(Eigen::Vector3d::Zero(), p, 1.0)) {
      result.removed_indices.push_back(i);
      continue;
    }
    result.cloud.points.push_back(p);
    result.cloud.reflectance.push_back(original.has_reflectance() ? original.reflectance[i]
                                                                  : 0.0);
  }
  result.simulated_begin = static_cast<int>(result.cloud.size());

  // simulation pass over the scan lattice; a trailing partial step at the
  // azimuth seam is dropped rather than duplicated
  const int n_azimuth =
      std::max(1, static_cast<int>(std::floor(2.0 * kPi / sensor.azimuth_resolution)));
  for (int e = 0; e < static_cast<int>(sensor.elevations.size()); ++e) {
    const double elevation = sensor.elevations[e];
    const double ce = std::cos(elevation);
    const double se = std::sin(elevation);
    for (int a = 0; a < n_azimuth; ++a) {
      const double azimuth = a * sensor.azimuth_resolution;
      const Eigen::Vector3d dir(ce * std::cos(azimuth), ce * std::sin(azimuth), se);
      const auto hit = bvh.closest_hit(Eigen::Vector3d::Zero(), dir, sensor.max_range);
      if (!hit) continue;

      const std::uint64_t ray_index =
          static_cast<std::uint64_t>(e) * static_cast<std::uint64_t>(n_azimuth) + a;
      Rng rng(mix_seed(sensor.rng_seed, 0x72617973ULL, ray_index));
      if (rng.uniform() < sensor.dropout) continue;
      const double range = hit->t + sensor.sigma(hit->t) * rng.normal();
      if (range <= 0.0) continue;
      result.cloud.points.push_back(dir * range);
      result.cloud.reflectance.push_back(0.5);
    }
  }
  return result;
}

namespace {

TriangleMesh pose_mesh(const TriangleMesh& model, const Eigen::Vector2d& position,
                       double yaw, double z_base) {
  Eigen::Vector3d lo, hi;
  model.bounding_box(lo, hi);
  const Eigen::Vector2d center_xy = 0.5 * (lo + hi).head<2>();
  const Eigen::Matrix2d r = rot2(yaw);
  TriangleMesh out = model;
  for (auto& v : out.vertices) {
    const Eigen::Vector2d xy = r * (v.head<2>() - center_xy) + position;
    v = {xy.x(), xy.y(), v.z() - lo.z() + z_base};
  }
  return out;
}

OrientedBox car_box(const TriangleMesh& model, const Eigen::Vector2d& position,
                    double yaw, double z_base) {
  Eigen::Vector3d lo, hi;
  model.bounding_box(lo, hi);
  OrientedBox box;
  box.size = hi - lo;
  // small clearance so returns on the outer mesh faces are strictly interior
  box.size.x() += 0.1;
  box.size.y() += 0.1;
  box.center = {position.x(), position.y(), z_base + 0.5 * box.size.z()};
  box.yaw = wrap_angle(yaw);
  box.score = 1.0;
  return box;
}

PointCloud transform_to_next_frame(const PointCloud& cloud, const PlanarRigidMotion& ego) {
  const Eigen::Matrix2d re_t = rot2(ego.theta).transpose();
  PointCloud out = cloud;
  for (auto& p : out.points) {
    const Eigen::Vector2d xy = re_t * (p.head<2>() - ego.t);
    p.x() = xy.x();
    p.y() = xy.y();
  }
  return out;
}

TriangleMesh transform_to_next_frame(const TriangleMesh& mesh, const PlanarRigidMotion& ego) {
  const Eigen::Matrix2d re_t = rot2(ego.theta).transpose();
  TriangleMesh out = mesh;
  for (auto& v : out.vertices) {
    const Eigen::Vector2d xy = re_t * (v.head<2>() - ego.t);
    v.x() = xy.x();
    v.y() = xy.y();
  }
  return out;
}

// Object motion as observed between the two scans: M_apparent = Ego^-1 . M_obj.
PlanarRigidMotion apparent_motion(const PlanarRigidMotion& object_world,
                                  const PlanarRigidMotion& ego) {
  const Eigen::Matrix2d re_t = rot2(ego.theta).transpose();
  return PlanarRigidMotion::world(wrap_angle(object_world.theta - ego.theta),
                                  re_t * (object_world.t - ego.t));
}

}  // namespace

AugmentedScenePair make_pair(const PointCloud& scene,
                             const std::vector<TriangleMesh>& mesh_library,
                             const SensorModel& sensor, const AugmentorConfig& cfg,
                             std::uint64_t rng_seed) {
  if (mesh_library.empty()) throw std::invalid_argument("make_pair: no meshes");

  const GroundPlane plane =
      ransac_ground(scene, cfg.ransac_iters, cfg.ransac_thresh, mix_seed(rng_seed, 1));
  const OccupancyMap2D region =
      drivable_region(scene, plane, cfg.region_cell, cfg.obstacle_low, cfg.obstacle_high);

  Rng rng(mix_seed(rng_seed, 2));
  const int k = rng.uniform_int(cfg.min_cars, cfg.max_cars);
  const std::vector<PlacedCar> cars =
      place_cars(region, mesh_library, k, mix_seed(rng_seed, 3), cfg);

  PlanarRigidMotion ego = PlanarRigidMotion::world(0.0, Eigen::Vector2d::Zero());
  if (cfg.sample_ego) {
    Rng ego_rng(mix_seed(rng_seed, 4));
    const PlanarRigidMotion arc = ackermann_sample(
        cfg.speed_min, cfg.speed_max, cfg.curvature_min, cfg.curvature_max, cfg.dt, ego_rng);
    ego = PlanarRigidMotion::world(arc.theta, arc.t);
  }

  // frame t
  std::vector<TriangleMesh> meshes_t;
  std::vector<OrientedBox> boxes;
  for (const auto& car : cars) {
    const double z_base = plane.height_at(car.position);
    meshes_t.push_back(pose_mesh(mesh_library[car.mesh_id], car.position, car.yaw, z_base));
    boxes.push_back(car_box(mesh_library[car.mesh_id], car.position, car.yaw, z_base));
  }
  SensorModel sensor_t = sensor;
  sensor_t.rng_seed = mix_seed(rng_seed, 5);
  const ScanResult frame_t = raycast_scan(meshes_t, scene, sensor_t);

  // frame t+1: cars advance by their motion, everything re-expressed in the
  // next sensor frame when the ego moves
  std::vector<TriangleMesh> meshes_t1;
  for (const auto& car : cars) {
    const Eigen::Vector2d next_position = rot2(car.motion.theta) * car.position + car.motion.t;
    const double next_yaw = car.yaw + car.motion.theta;
    const double z_base = plane.height_at(next_position);
    TriangleMesh posed =
        pose_mesh(mesh_library[car.mesh_id], next_position, next_yaw, z_base);
    meshes_t1.push_back(transform_to_next_frame(posed, ego));
  }
  const PointCloud scene_t1 = transform_to_next_frame(scene, ego);
  SensorModel sensor_t1 = sensor;
  sensor_t1.rng_seed = mix_seed(rng_seed, 6);
  const ScanResult frame_t1 = raycast_scan(meshes_t1, scene_t1, sensor_t1);

  AugmentedScenePair pair;
  pair.scan_t = frame_t.cloud;
  pair.scan_t1 = frame_t1.cloud;
  pair.boxes = boxes;
  for (const auto& car : cars) pair.object_motions.push_back(apparent_motion(car.motion, ego));
  pair.ego = ego;
  pair.ego_mode = cfg.sample_ego ? "sampled" : "identity";
  pair.flow = synthesize_point_flow(pair.boxes, pair.object_motions, pair.ego, pair.scan_t);
  return pair;
}

}  // namespace rigidflow
