// SPDX-FileCopyrightText: 2026 The rigidflow authors
// SPDX-License-Identifier: Apache-2.0

#include "rigidflow/rigidmotion.hpp"

#include <Eigen/LU>
#include <cmath>
#include <stdexcept>

namespace rigidflow {

double wrap_angle(double theta) {
  double w = std::remainder(theta, 2.0 * kPi);  // in [-pi, pi]
  if (w <= -kPi) w = kPi;
  return w;
}

Eigen::Matrix2d rot2(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

PlanarRigidMotion PlanarRigidMotion::world(double theta, const Eigen::Vector2d& t) {
  PlanarRigidMotion m;
  m.theta = wrap_angle(theta);
  m.t = t;
  return m;
}

PlanarRigidMotion PlanarRigidMotion::local(double theta, const Eigen::Vector2d& t,
                                           const Eigen::Vector2d& origin) {
  PlanarRigidMotion m;
  m.theta = wrap_angle(theta);
  m.t = t;
  m.local_origin = origin;
  return m;
}

bool RigidMotion3D::is_valid(double tol) const {
  const Eigen::Matrix3d should_be_identity = rotation.transpose() * rotation;
  if ((should_be_identity - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol)
    return false;
  if (std::abs(rotation.determinant() - 1.0) > tol) return false;
  return translation.allFinite();
}

double RigidMotion3D::yaw() const {
  return std::atan2(rotation(1, 0), rotation(0, 0));
}

double RigidMotion3D::angle() const {
  const double c = 0.5 * (rotation.trace() - 1.0);
  return std::acos(std::min(1.0, std::max(-1.0, c)));
}

Eigen::Vector3d RigidMotion3D::apply(const Eigen::Vector3d& p) const {
  return rotation * p + translation;
}

RigidMotion3D RigidMotion3D::compose(const RigidMotion3D& inner) const {
  RigidMotion3D out;
  out.rotation = rotation * inner.rotation;
  out.translation = rotation * inner.translation + translation;
  return out;
}

PlanarRigidMotion RigidMotion3D::to_planar() const {
  return PlanarRigidMotion::world(yaw(), translation.head<2>());
}

Eigen::Vector2d planar_flow(const Eigen::Vector2d& p, const Eigen::Vector2d& origin,
                            double theta, const Eigen::Vector2d& t) {
  const Eigen::Vector2d d = p - origin;
  return rot2(theta) * d + t - d;
}

Eigen::Vector3d flow_from_local_motion(const Eigen::Vector3d& p,
                                       const Eigen::Vector2d& origin,
                                       const PlanarRigidMotion& m) {
  const Eigen::Vector2d v = planar_flow(p.head<2>(), origin, m.theta, m.t);
  return {v.x(), v.y(), 0.0};
}

Eigen::Vector3d flow_from_local_motion(const Eigen::Vector3d& p,
                                       const Eigen::Vector3d& origin,
                                       const RigidMotion3D& m) {
  const Eigen::Vector3d d = p - origin;
  return m.rotation * d + m.translation - d;
}

PlanarRigidMotion local_to_world(const PlanarRigidMotion& m) {
  if (m.is_world())
    throw std::invalid_argument("local_to_world: motion is already world-tagged");
  const Eigen::Vector2d& o = *m.local_origin;
  const Eigen::Vector2d t_w = (Eigen::Matrix2d::Identity() - rot2(m.theta)) * o + m.t;
  return PlanarRigidMotion::world(m.theta, t_w);
}

PlanarRigidMotion world_to_local(const PlanarRigidMotion& m,
                                 const Eigen::Vector2d& origin) {
  if (!m.is_world())
    throw std::invalid_argument("world_to_local: motion is not world-tagged");
  const Eigen::Vector2d t_l = (rot2(m.theta) - Eigen::Matrix2d::Identity()) * origin + m.t;
  return PlanarRigidMotion::local(m.theta, t_l, origin);
}

double claim1_inconsistency(const Eigen::Vector2d& p, const Eigen::Vector2d& q,
                            double theta) {
  const Eigen::Vector2d d = p - q;
  return ((Eigen::Matrix2d::Identity() - rot2(theta)) * d).norm();
}

Claim1Report check_claim1(const Eigen::Vector2d& p, const Eigen::Vector2d& q,
                          const Eigen::Vector2d& v,
                          const std::vector<double>& thetas) {
  if (p == q) throw std::invalid_argument("check_claim1: p and q must differ");
  Claim1Report report;
  report.translation_at_identity = v;
  report.thetas = thetas;
  report.inconsistency.reserve(thetas.size());
  report.identity_only = true;
  for (double theta : thetas) {
    const double r = claim1_inconsistency(p, q, theta);
    report.inconsistency.push_back(r);
    if (wrap_angle(theta) != 0.0 && r <= 0.0) report.identity_only = false;
  }
  return report;
}

Claim1Report check_claim1(const Eigen::Vector2d& p, const Eigen::Vector2d& q,
                          const Eigen::Vector2d& v) {
  std::vector<double> thetas;
  for (int i = -32; i <= 32; ++i) thetas.push_back(i * (kPi / 32.0));
  return check_claim1(p, q, v, thetas);
}

bool check_claim2(const Eigen::Vector2d& p, const Eigen::Vector2d& o_a,
                  const Eigen::Vector2d& q, const Eigen::Vector2d& o_b,
                  const PlanarRigidMotion& m) {
  const Eigen::Vector2d da = p - o_a;
  const Eigen::Vector2d db = q - o_b;
  if (da.x() != db.x() || da.y() != db.y())
    throw std::invalid_argument("check_claim2: p - o_A != q - o_B");
  const Eigen::Vector2d va = planar_flow(p, o_a, m.theta, m.t);
  const Eigen::Vector2d vb = planar_flow(q, o_b, m.theta, m.t);
  return va.x() == vb.x() && va.y() == vb.y();
}

std::vector<StationarityRow> stationarity_experiment(int grid_n,
                                                     const std::vector<double>& thetas,
                                                     double spacing) {
  if (grid_n < 2) throw std::invalid_argument("stationarity_experiment: grid_n >= 2");
  std::vector<Eigen::Vector2d> origins;
  origins.reserve(static_cast<std::size_t>(grid_n) * grid_n);
  for (int i = 0; i < grid_n; ++i)
    for (int j = 0; j < grid_n; ++j)
      origins.emplace_back(i * spacing, j * spacing);

  // Translation of the patch motion cancels out of every pairwise difference;
  // a fixed nonzero value keeps the experiment honest about that.
  const Eigen::Vector2d t_local(0.3, -0.1);

  double max_dist = 0.0;
  for (std::size_t a = 0; a < origins.size(); ++a)
    for (std::size_t b = a + 1; b < origins.size(); ++b)
      max_dist = std::max(max_dist, (origins[a] - origins[b]).norm());

  std::vector<StationarityRow> rows;
  rows.reserve(thetas.size());
  for (double theta : thetas) {
    StationarityRow row;
    row.theta = theta;

    // Per-position regression targets for the identical physical patch
    // motion: the local target is the same everywhere, the world target
    // picks up (I - R) o.
    std::vector<Eigen::Vector2d> world_targets;
    std::vector<Eigen::Vector2d> local_targets;
    world_targets.reserve(origins.size());
    local_targets.reserve(origins.size());
    for (const auto& o : origins) {
      const auto m = PlanarRigidMotion::local(theta, t_local, o);
      world_targets.push_back(local_to_world(m).t);
      local_targets.push_back(m.t);
    }

    double world_spread = 0.0;
    double local_spread = 0.0;
    for (std::size_t a = 0; a < origins.size(); ++a) {
      for (std::size_t b = a + 1; b < origins.size(); ++b) {
        world_spread = std::max(world_spread, (world_targets[a] - world_targets[b]).norm());
        local_spread = std::max(local_spread, (local_targets[a] - local_targets[b]).norm());
      }
    }
    row.world_spread = world_spread;
    row.local_spread = local_spread;
    row.world_spread_closed_form = 2.0 * std::sin(std::abs(theta) / 2.0) * max_dist;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace rigidflow
