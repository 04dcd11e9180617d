// SPDX-FileCopyrightText: 2026 The rigidflow authors
// SPDX-License-Identifier: Apache-2.0

#include "rigidflow/baselines.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

#include "kdtree.hpp"

namespace rigidflow {

RigidMotion3D fit_rigid(std::span<const Eigen::Vector3d> src,
                        std::span<const Eigen::Vector3d> dst) {
  if (src.size() != dst.size())
    throw std::invalid_argument("fit_rigid: size mismatch");
  if (src.size() < 3)
    throw std::invalid_argument("fit_rigid: need at least 3 correspondences");

  const double n = static_cast<double>(src.size());
  Eigen::Vector3d c_src = Eigen::Vector3d::Zero();
  Eigen::Vector3d c_dst = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    c_src += src[i];
    c_dst += dst[i];
  }
  c_src /= n;
  c_dst /= n;

  Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();
  double src_scatter = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const Eigen::Vector3d a = src[i] - c_src;
    src_scatter += a.squaredNorm();
    cross += a * (dst[i] - c_dst).transpose();
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  // A collinear source leaves the rotation about its axis unconstrained.
  if (sv(1) <= 1e-12 * std::max(sv(0), src_scatter))
    throw std::runtime_error("fit_rigid: degenerate (collinear) configuration");

  Eigen::Vector3d flip = Eigen::Vector3d::Ones();
  flip(2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0 ? -1.0 : 1.0;

  RigidMotion3D motion;
  motion.rotation = svd.matrixV() * flip.asDiagonal() * svd.matrixU().transpose();
  motion.translation = c_dst - motion.rotation * c_src;
  return motion;
}

IcpResult icp(const PointCloud& src, const PointCloud& dst, int max_iter, double tol) {
  if (src.empty() || dst.empty())
    throw std::invalid_argument("icp: empty point cloud");

  const KdTree3 tree(dst.points);

  IcpResult result;  // identity start

  std::vector<Eigen::Vector3d> moved(src.size());
  std::vector<Eigen::Vector3d> matched(src.size());
  for (int iter = 0; iter < max_iter; ++iter) {
    double residual = 0.0;
    for (std::size_t i = 0; i < src.size(); ++i) {
      moved[i] = result.motion.apply(src.points[i]);
      const auto [idx, d2] = tree.nearest(moved[i]);
      matched[i] = dst.points[idx];
      residual += std::sqrt(d2);
    }
    residual /= static_cast<double>(src.size());
    result.residual_history.push_back(residual);
    result.iterations = iter + 1;

    RigidMotion3D update;
    try {
      update = fit_rigid(moved, matched);
    } catch (const std::exception&) {
      break;  // degenerate association; keep the motion found so far
    }
    result.motion = update.compose(result.motion);

    if (update.translation.norm() + update.angle() < tol) {
      result.converged = true;
      break;
    }
  }

  double residual = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const auto [idx, d2] = tree.nearest(result.motion.apply(src.points[i]));
    residual += std::sqrt(d2);
  }
  result.mean_residual = residual / static_cast<double>(src.size());
  return result;
}

PlanarFit fit_planar_from_flow(std::span<const Eigen::Vector2d> points,
                               std::span<const Eigen::Vector2d> flows) {
  if (points.size() != flows.size())
    throw std::invalid_argument("fit_planar_from_flow: size mismatch");
  if (points.size() < 2)
    throw std::invalid_argument("fit_planar_from_flow: need at least 2 points");

  const double n = static_cast<double>(points.size());
  Eigen::Vector2d c_src = Eigen::Vector2d::Zero();
  Eigen::Vector2d c_dst = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < points.size(); ++i) {
    c_src += points[i];
    c_dst += points[i] + flows[i];
  }
  c_src /= n;
  c_dst /= n;

  // theta* = atan2(sum a x b, sum a . b) over the centered pairs
  double dot = 0.0, crs = 0.0, scatter = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Eigen::Vector2d a = points[i] - c_src;
    const Eigen::Vector2d b = points[i] + flows[i] - c_dst;
    dot += a.dot(b);
    crs += a.x() * b.y() - a.y() * b.x();
    scatter += a.squaredNorm();
  }
  if (scatter <= 0.0)
    throw std::runtime_error("fit_planar_from_flow: all points coincide");
  if (dot == 0.0 && crs == 0.0)
    throw std::runtime_error("fit_planar_from_flow: rotation undetermined");

  PlanarFit fit;
  const double theta = std::atan2(crs, dot);
  const Eigen::Matrix2d r = rot2(theta);
  fit.motion = PlanarRigidMotion::world(theta, c_dst - r * c_src);

  double sq = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    sq += (r * points[i] + fit.motion.t - (points[i] + flows[i])).squaredNorm();
  fit.rms_residual = std::sqrt(sq / n);
  return fit;
}

}  // namespace rigidflow
