// SPDX-FileCopyrightText: 2026 The rigidflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "rigidflow/geometry.hpp"
#include "rigidflow/rigidmotion.hpp"

namespace rigidflow {

// Least-squares rigid motion minimizing sum ||R s_i + t - d_i||^2 over
// corresponding point sets: both sets centered, SVD of the cross-covariance,
// reflections corrected through the determinant sign, translation from the
// centroids. Throws on fewer than 3 pairs or a (near-)collinear source.
RigidMotion3D fit_rigid(std::span<const Eigen::Vector3d> src,
                        std::span<const Eigen::Vector3d> dst);

struct IcpResult {
  RigidMotion3D motion;
  int iterations = 0;
  double mean_residual = 0.0;
  std::vector<double> residual_history;  // association residual per iteration
  bool converged = false;
};

// Point-to-point ICP: alternates exact nearest-neighbor association against
// dst (ties broken towards the lowest index) with a rigid fit on the matched
// pairs, starting from centroid alignment, until the incremental update norm
// drops below tol or max_iter is reached.
IcpResult icp(const PointCloud& src, const PointCloud& dst, int max_iter = 50,
              double tol = 1e-8);

struct PlanarFit {
  PlanarRigidMotion motion;  // world-tagged
  double rms_residual = 0.0;
};

// Least-squares planar motion (theta, t) minimizing
// sum ||R p_i + t - (p_i + v_i)||^2 given per-point flow. Doubles as the
// brute-force oracle for the representation checks and the pooling tests.
PlanarFit fit_planar_from_flow(std::span<const Eigen::Vector2d> points,
                               std::span<const Eigen::Vector2d> flows);

}  // namespace rigidflow
