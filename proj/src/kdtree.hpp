// SPDX-FileCopyrightText: 2026 The rigidflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

namespace rigidflow {

// Exact nearest-neighbor search over a fixed set of 3D points. Median-split
// k-d tree; equal distances resolve to the lowest point index so queries are
// deterministic regardless of build or traversal details.
class KdTree3 {
 public:
  explicit KdTree3(const std::vector<Eigen::Vector3d>& points) : points_(points) {
    if (points_.empty()) throw std::invalid_argument("KdTree3: empty point set");
    order_.resize(points_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<int>(i);
    nodes_.reserve(2 * points_.size());
    root_ = build(0, static_cast<int>(order_.size()), 0);
  }

  // returns (index, squared distance)
  std::pair<int, double> nearest(const Eigen::Vector3d& query) const {
    int best_idx = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    search(root_, query, best_idx, best_d2);
    return {best_idx, best_d2};
  }

 private:
  struct Node {
    int axis = 0;
    double split = 0.0;
    int point = -1;     // index into points_
    int left = -1, right = -1;
  };

  int build(int begin, int end, int depth) {
    if (begin >= end) return -1;
    const int axis = depth % 3;
    const int mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) {
                       const double va = points_[a][axis], vb = points_[b][axis];
                       return va < vb || (va == vb && a < b);
                     });
    Node node;
    node.axis = axis;
    node.point = order_[mid];
    node.split = points_[node.point][axis];
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    nodes_[self].left = build(begin, mid, depth + 1);
    nodes_[self].right = build(mid + 1, end, depth + 1);
    return self;
  }

  void consider(int idx, const Eigen::Vector3d& query, int& best_idx,
                double& best_d2) const {
    const double d2 = (points_[idx] - query).squaredNorm();
    if (d2 < best_d2 || (d2 == best_d2 && idx < best_idx)) {
      best_d2 = d2;
      best_idx = idx;
    }
  }

  void search(int node_id, const Eigen::Vector3d& query, int& best_idx,
              double& best_d2) const {
    if (node_id < 0) return;
    const Node& node = nodes_[node_id];
    consider(node.point, query, best_idx, best_d2);
    const double delta = query[node.axis] - node.split;
    const int near = delta < 0.0 ? node.left : node.right;
    const int far = delta < 0.0 ? node.right : node.left;
    search(near, query, best_idx, best_d2);
    if (delta * delta <= best_d2) search(far, query, best_idx, best_d2);
  }

  const std::vector<Eigen::Vector3d>& points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace rigidflow
