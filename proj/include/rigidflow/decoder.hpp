// SPDX-FileCopyrightText: 2026 The rigidflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <vector>

#include "rigidflow/geometry.hpp"
#include "rigidflow/rigidmotion.hpp"
#include "rigidflow/voxelgrid.hpp"

namespace rigidflow {

// Per-ground-cell rigid motions, always expressed in world coordinates so
// pooling across cells is meaningful.
using MotionField = std::map<GroundIndex, PlanarRigidMotion>;

// Score-ordered non-maximum suppression over ground-plane footprints. Boxes
// scoring below score_thresh are removed; a box is suppressed when its
// footprint IoU with an already-kept box exceeds overlap_thresh. Output is
// sorted by descending score.
std::vector<OrientedBox> nms(std::vector<OrientedBox> boxes, double score_thresh,
                             double overlap_thresh);

// Intersection over union of the two yaw-rotated footprint rectangles,
// computed by convex polygon clipping. Symmetric, in [0, 1].
double ground_iou(const OrientedBox& a, const OrientedBox& b);

// Lower median: for even counts the smaller of the two central values, so the
// result is always an observed value.
double lower_median(std::vector<double> values);

// Circular median: the observed angle minimizing the summed wrapped absolute
// deviation; ties broken towards the smallest wrapped candidate.
double circular_median(const std::vector<double>& angles);

// Median-pools the world-frame motions of the occupied cells whose centers
// fall inside the box footprint: componentwise lower median of translations,
// circular median of rotations. Throws when no cell is inside.
PlanarRigidMotion pool_object_motion(const MotionField& field, const OrientedBox& box,
                                     const GridSpec& grid);

// Median-pools all occupied cells not inside any box footprint. Throws when
// every cell is covered.
PlanarRigidMotion pool_ego_motion(const MotionField& field,
                                  const std::vector<OrientedBox>& boxes,
                                  const GridSpec& grid);

// Ego convention: (theta, t) is the pose of sensor frame t+1 expressed in
// frame t, so a static point p flows by R(theta)^T (p - t) - p. The world
// motion that induces that flow (the "background motion" the field carries)
// is theta_bg = -theta, t_bg = -R(theta)^T t; the two helpers convert back
// and forth.
PlanarRigidMotion ego_pose_to_background_motion(const PlanarRigidMotion& ego);
PlanarRigidMotion background_motion_to_ego_pose(const PlanarRigidMotion& bg);

// Ground truth synthesized from object boxes + motions and the ego record.
// Points inside a box footprint flow with that object's world motion (highest
// score wins when footprints overlap, counted as a warning); all other points
// flow with the ego-induced background motion. Per-cell targets carry the
// same assignment at the occupied ground cells, in world form and converted
// to each cell's local frame.
struct GroundTruthField {
  FlowField flow;
  MotionField cell_world;
  std::map<GroundIndex, PlanarRigidMotion> cell_local;
  int multi_box_points = 0;
};

FlowField synthesize_point_flow(const std::vector<OrientedBox>& boxes,
                                const std::vector<PlanarRigidMotion>& motions,
                                const PlanarRigidMotion& ego, const PointCloud& cloud,
                                int* multi_box_warnings = nullptr);

GroundTruthField synthesize_gt(const std::vector<OrientedBox>& boxes,
                               const std::vector<PlanarRigidMotion>& motions,
                               const PlanarRigidMotion& ego, const PointCloud& cloud,
                               const SparseVoxelGrid& grid);

}  // namespace rigidflow
