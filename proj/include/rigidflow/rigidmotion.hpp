// SPDX-FileCopyrightText: 2026 The rigidflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

namespace rigidflow {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Wrap an angle into (-pi, pi], ties mapped to +pi.
double wrap_angle(double theta);

// 2x2 rotation matrix for a rotation about the vertical axis.
Eigen::Matrix2d rot2(double theta);

// Planar rigid motion: rotation about the vertical axis plus a 2D
// ground-plane translation. A motion is tagged with the origin it is
// expressed about: the world origin (the scanner) or a local origin o_L.
// The rotation is identical in every frame; the translation changes as
//
//   t_W = (I - R) o_L + t_L        t_L = (R - I) o_L + t_W
//
// (local_to_world / world_to_local below).
struct PlanarRigidMotion {
  double theta = 0.0;  // radians, kept wrapped in (-pi, pi]
  Eigen::Vector2d t = Eigen::Vector2d::Zero();
  std::optional<Eigen::Vector2d> local_origin;  // nullopt = world frame

  bool is_world() const { return !local_origin.has_value(); }

  static PlanarRigidMotion world(double theta, const Eigen::Vector2d& t);
  static PlanarRigidMotion local(double theta, const Eigen::Vector2d& t,
                                 const Eigen::Vector2d& origin);

  friend bool operator==(const PlanarRigidMotion& a, const PlanarRigidMotion& b) {
    return a.theta == b.theta && a.t == b.t && a.local_origin == b.local_origin;
  }
};

// Full 3D rigid motion, kept for ICP interop.
struct RigidMotion3D {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  bool is_valid(double tol = 1e-9) const;  // R^T R = I, det(R) = +1
  double yaw() const;                      // rotation angle about the vertical
  double angle() const;                    // total rotation angle
  Eigen::Vector3d apply(const Eigen::Vector3d& p) const;
  RigidMotion3D compose(const RigidMotion3D& inner) const;  // this ∘ inner
  PlanarRigidMotion to_planar() const;     // world-tagged (yaw, t.xy)
};

// Per-point (or per-ground-cell) 3D motion vectors, aligned with the source
// cloud or grid by index.
using FlowField = std::vector<Eigen::Vector3d>;

// Flow induced at p by a motion expressed about the local origin o:
//   v = [R (p - o) + t] - (p - o)
// Planar motions act on the XY components and leave the vertical flow zero.
Eigen::Vector2d planar_flow(const Eigen::Vector2d& p, const Eigen::Vector2d& origin,
                            double theta, const Eigen::Vector2d& t);
Eigen::Vector3d flow_from_local_motion(const Eigen::Vector3d& p,
                                       const Eigen::Vector2d& origin,
                                       const PlanarRigidMotion& m);
Eigen::Vector3d flow_from_local_motion(const Eigen::Vector3d& p,
                                       const Eigen::Vector3d& origin,
                                       const RigidMotion3D& m);

// Reframing. local_to_world requires a local tag, world_to_local a world tag;
// the rotation never changes. Round trips are exact to 1e-12.
PlanarRigidMotion local_to_world(const PlanarRigidMotion& m);
PlanarRigidMotion world_to_local(const PlanarRigidMotion& m,
                                 const Eigen::Vector2d& origin);

// Norm of the translation disagreement ||(I - R(theta)) (p - q)|| between the
// world-frame translations required to explain one flow vector at two
// different points. Zero only at theta = 0; equals 2 sin(|theta|/2) ||p - q||.
double claim1_inconsistency(const Eigen::Vector2d& p, const Eigen::Vector2d& q,
                            double theta);

// Scans a rotation grid for world-frame motions explaining the same flow v at
// both p and q. The consistent set is exactly {R = I, t = v}; every nonzero
// rotation leaves a positive translation disagreement.
struct Claim1Report {
  Eigen::Vector2d translation_at_identity;
  std::vector<double> thetas;
  std::vector<double> inconsistency;  // ||(I - R(theta)) (p - q)|| per theta
  bool identity_only = false;
};
Claim1Report check_claim1(const Eigen::Vector2d& p, const Eigen::Vector2d& q,
                          const Eigen::Vector2d& v,
                          const std::vector<double>& thetas);
Claim1Report check_claim1(const Eigen::Vector2d& p, const Eigen::Vector2d& q,
                          const Eigen::Vector2d& v);

// Shift invariance of the local representation: when p - o_A == q - o_B
// (exact, on the computed differences), the same local motion induces
// bit-identical flow at both configurations. Throws std::invalid_argument on
// a violated precondition.
bool check_claim2(const Eigen::Vector2d& p, const Eigen::Vector2d& o_a,
                  const Eigen::Vector2d& q, const Eigen::Vector2d& o_b,
                  const PlanarRigidMotion& m);

// Applies one local motion patch at every node of an n x n grid and measures
// how far apart the per-position regression targets are. World-frame
// translation targets spread with |theta| (max pairwise ||(I - R) d||, equal
// to 2 sin(|theta|/2) max ||d||); local-frame targets are identical, spread 0.
struct StationarityRow {
  double theta = 0.0;
  double world_spread = 0.0;
  double world_spread_closed_form = 0.0;
  double local_spread = 0.0;
};
std::vector<StationarityRow> stationarity_experiment(int grid_n,
                                                     const std::vector<double>& thetas,
                                                     double spacing = 1.0);

}  // namespace rigidflow
