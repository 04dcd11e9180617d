// SPDX-FileCopyrightText: 2026 The rigidflow authors
// SPDX-License-Identifier: Apache-2.0

#include "rigidflow/geometry.hpp"

#include <cmath>
#include <limits>

namespace rigidflow {

void TriangleMesh::bounding_box(Eigen::Vector3d& lo, Eigen::Vector3d& hi) const {
  lo.setConstant(std::numeric_limits<double>::infinity());
  hi.setConstant(-std::numeric_limits<double>::infinity());
  for (const auto& v : vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
}

std::array<Eigen::Vector2d, 4> OrientedBox::footprint_corners() const {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  const double hl = 0.5 * size.x();
  const double hw = 0.5 * size.y();
  const Eigen::Vector2d cxy = center.head<2>();
  const Eigen::Vector2d ex(c * hl, s * hl);
  const Eigen::Vector2d ey(-s * hw, c * hw);
  return {cxy + ex + ey, cxy - ex + ey, cxy - ex - ey, cxy + ex - ey};
}

bool OrientedBox::footprint_contains(const Eigen::Vector2d& p) const {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  const Eigen::Vector2d d = p - center.head<2>();
  const double u = c * d.x() + s * d.y();   // along length
  const double v = -s * d.x() + c * d.y();  // along width
  return std::abs(u) <= 0.5 * size.x() && std::abs(v) <= 0.5 * size.y();
}

}  // namespace rigidflow
