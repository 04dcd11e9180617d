// SPDX-FileCopyrightText: 2026 The rigidflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

namespace rigidflow {

struct BvhTriangle {
  Eigen::Vector3d a, b, c;
};

// Moeller-Trumbore ray/triangle intersection, inclusive at the edges.
// Returns the ray parameter t > 0 of the hit, or nothing.
inline std::optional<double> ray_triangle(const Eigen::Vector3d& origin,
                                          const Eigen::Vector3d& dir,
                                          const BvhTriangle& tri) {
  const Eigen::Vector3d e1 = tri.b - tri.a;
  const Eigen::Vector3d e2 = tri.c - tri.a;
  const Eigen::Vector3d pvec = dir.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < 1e-14) return std::nullopt;  // parallel
  const double inv_det = 1.0 / det;
  const Eigen::Vector3d tvec = origin - tri.a;
  const double u = tvec.dot(pvec) * inv_det;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Eigen::Vector3d qvec = tvec.cross(e1);
  const double v = dir.dot(qvec) * inv_det;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = e2.dot(qvec) * inv_det;
  if (t <= 0.0) return std::nullopt;
  return t;
}

struct BvhHit {
  double t = 0.0;
  int triangle = -1;
};

// Axis-aligned BVH over a triangle soup. Median split on the longest axis of
// the centroid bounds; traversal prunes boxes only when they cannot contain a
// closer hit, so results match a brute-force scan of the same triangles.
class TriangleBvh {
 public:
  explicit TriangleBvh(std::vector<BvhTriangle> triangles)
      : triangles_(std::move(triangles)) {
    order_.resize(triangles_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<int>(i);
    if (!triangles_.empty()) root_ = build(0, static_cast<int>(order_.size()));
  }

  bool empty() const { return triangles_.empty(); }

  // Nearest hit with 0 < t <= tmax.
  std::optional<BvhHit> closest_hit(const Eigen::Vector3d& origin,
                                    const Eigen::Vector3d& dir, double tmax) const {
    BvhHit best{tmax, -1};
    if (root_ >= 0) closest(root_, origin, dir, best);
    if (best.triangle < 0) return std::nullopt;
    return best;
  }

  // Any hit with 0 < t < tlimit (strict).
  bool any_hit_before(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                      double tlimit) const {
    return root_ >= 0 && any(root_, origin, dir, tlimit);
  }

 private:
  struct Node {
    Eigen::Vector3d lo, hi;
    int left = -1, right = -1;
    int begin = 0, count = 0;  // leaf when count > 0
  };

  static void grow(Eigen::Vector3d& lo, Eigen::Vector3d& hi, const Eigen::Vector3d& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }

  int build(int begin, int end) {
    Node node;
    node.lo.setConstant(std::numeric_limits<double>::infinity());
    node.hi.setConstant(-std::numeric_limits<double>::infinity());
    Eigen::Vector3d clo = node.lo, chi = node.hi;
    for (int i = begin; i < end; ++i) {
      const BvhTriangle& t = triangles_[order_[i]];
      grow(node.lo, node.hi, t.a);
      grow(node.lo, node.hi, t.b);
      grow(node.lo, node.hi, t.c);
      const Eigen::Vector3d centroid = (t.a + t.b + t.c) / 3.0;
      grow(clo, chi, centroid);
    }
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (end - begin <= 4) {
      nodes_[self].begin = begin;
      nodes_[self].count = end - begin;
      return self;
    }
    int axis = 0;
    (chi - clo).maxCoeff(&axis);
    const int mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int ia, int ib) {
                       const auto& ta = triangles_[ia];
                       const auto& tb = triangles_[ib];
                       const double ca = ta.a[axis] + ta.b[axis] + ta.c[axis];
                       const double cb = tb.a[axis] + tb.b[axis] + tb.c[axis];
                       return ca < cb || (ca == cb && ia < ib);
                     });
    nodes_[self].left = build(begin, mid);
    nodes_[self].right = build(mid, end);
    return self;
  }

  // Slab test; entry parameter through `t_entry` when the box is hit in [0, tmax].
  static bool hit_box(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi,
                      const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                      double tmax, double& t_entry) {
    double t0 = 0.0, t1 = tmax;
    for (int a = 0; a < 3; ++a) {
      const double inv = 1.0 / dir[a];
      double near = (lo[a] - origin[a]) * inv;
      double far = (hi[a] - origin[a]) * inv;
      if (inv < 0.0) std::swap(near, far);
      t0 = std::max(t0, near);
      t1 = std::min(t1, far);
      if (t0 > t1) return false;
    }
    t_entry = t0;
    return true;
  }

  void closest(int node_id, const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
               BvhHit& best) const {
    const Node& node = nodes_[node_id];
    double t_entry = 0.0;
    if (!hit_box(node.lo, node.hi, origin, dir, best.t, t_entry)) return;
    if (node.count > 0) {
      for (int i = node.begin; i < node.begin + node.count; ++i) {
        const int tri = order_[i];
        if (const auto t = ray_triangle(origin, dir, triangles_[tri])) {
          if (*t <= best.t && (*t < best.t || best.triangle < 0 || tri < best.triangle)) {
            best.t = *t;
            best.triangle = tri;
          }
        }
      }
      return;
    }
    closest(node.left, origin, dir, best);
    closest(node.right, origin, dir, best);
  }

  bool any(int node_id, const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
           double tlimit) const {
    const Node& node = nodes_[node_id];
    double t_entry = 0.0;
    if (!hit_box(node.lo, node.hi, origin, dir, tlimit, t_entry)) return false;
    if (node.count > 0) {
      for (int i = node.begin; i < node.begin + node.count; ++i) {
        if (const auto t = ray_triangle(origin, dir, triangles_[order_[i]]))
          if (*t < tlimit) return true;
      }
      return false;
    }
    return any(node.left, origin, dir, tlimit) || any(node.right, origin, dir, tlimit);
  }

  std::vector<BvhTriangle> triangles_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace rigidflow
