// SPDX-FileCopyrightText: 2026 The rigidflow authors
// SPDX-License-Identifier: Apache-2.0

#include "rigidflow/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rigidflow {

namespace {

double polygon_area(const std::vector<Eigen::Vector2d>& poly) {
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % poly.size()];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * twice;
}

// Sutherland-Hodgman clip of a convex CCW polygon against the CCW edge a->b.
std::vector<Eigen::Vector2d> clip_edge(const std::vector<Eigen::Vector2d>& poly,
                                       const Eigen::Vector2d& a,
                                       const Eigen::Vector2d& b) {
  std::vector<Eigen::Vector2d> out;
  const Eigen::Vector2d e = b - a;
  auto side = [&](const Eigen::Vector2d& p) {
    return e.x() * (p.y() - a.y()) - e.y() * (p.x() - a.x());
  };
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Eigen::Vector2d& cur = poly[i];
    const Eigen::Vector2d& nxt = poly[(i + 1) % poly.size()];
    const double sc = side(cur);
    const double sn = side(nxt);
    if (sc >= 0.0) out.push_back(cur);
    if ((sc > 0.0 && sn < 0.0) || (sc < 0.0 && sn > 0.0)) {
      const double t = sc / (sc - sn);
      out.push_back(cur + t * (nxt - cur));
    }
  }
  return out;
}

}  // namespace

double ground_iou(const OrientedBox& a, const OrientedBox& b) {
  const auto ca = a.footprint_corners();
  const auto cb = b.footprint_corners();
  std::vector<Eigen::Vector2d> poly(ca.begin(), ca.end());
  for (int i = 0; i < 4 && !poly.empty(); ++i)
    poly = clip_edge(poly, cb[i], cb[(i + 1) % 4]);
  const double inter = poly.size() >= 3 ? std::max(0.0, polygon_area(poly)) : 0.0;
  const double uni = a.footprint_area() + b.footprint_area() - inter;
  if (inter <= 0.0 || uni <= 0.0) return 0.0;
  return std::min(1.0, inter / uni);
}

std::vector<OrientedBox> nms(std::vector<OrientedBox> boxes, double score_thresh,
                             double overlap_thresh) {
  std::erase_if(boxes, [&](const OrientedBox& b) { return b.score < score_thresh; });
  std::stable_sort(boxes.begin(), boxes.end(),
                   [](const OrientedBox& a, const OrientedBox& b) { return a.score > b.score; });
  std::vector<OrientedBox> kept;
  for (const auto& candidate : boxes) {
    bool suppressed = false;
    for (const auto& k : kept) {
      if (ground_iou(candidate, k) > overlap_thresh) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(candidate);
  }
  return kept;
}

double lower_median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("lower_median: empty input");
  const std::size_t mid = (values.size() - 1) / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                   values.end());
  return values[mid];
}

double circular_median(const std::vector<double>& angles) {
  if (angles.empty()) throw std::invalid_argument("circular_median: empty input");
  std::vector<double> candidates(angles.size());
  std::transform(angles.begin(), angles.end(), candidates.begin(), wrap_angle);
  std::sort(candidates.begin(), candidates.end());
  double best = candidates.front();
  double best_cost = std::numeric_limits<double>::infinity();
  for (double c : candidates) {
    double cost = 0.0;
    for (double a : angles) cost += std::abs(wrap_angle(a - c));
    if (cost < best_cost) {
      best_cost = cost;
      best = c;
    }
  }
  return best;
}

namespace {

PlanarRigidMotion pool_motions(const std::vector<const PlanarRigidMotion*>& motions) {
  std::vector<double> xs, ys, thetas;
  xs.reserve(motions.size());
  ys.reserve(motions.size());
  thetas.reserve(motions.size());
  for (const auto* m : motions) {
    if (!m->is_world())
      throw std::invalid_argument("motion field entry is not world-tagged");
    xs.push_back(m->t.x());
    ys.push_back(m->t.y());
    thetas.push_back(m->theta);
  }
  return PlanarRigidMotion::world(circular_median(thetas),
                                  {lower_median(xs), lower_median(ys)});
}

}  // namespace

PlanarRigidMotion pool_object_motion(const MotionField& field, const OrientedBox& box,
                                     const GridSpec& grid) {
  std::vector<const PlanarRigidMotion*> inside;
  for (const auto& [g, m] : field)
    if (box.footprint_contains(grid.ground_cell_center(g))) inside.push_back(&m);
  if (inside.empty())
    throw std::runtime_error("pool_object_motion: no occupied cell inside box at (" +
                             std::to_string(box.center.x()) + ", " +
                             std::to_string(box.center.y()) + ")");
  return pool_motions(inside);
}

PlanarRigidMotion pool_ego_motion(const MotionField& field,
                                  const std::vector<OrientedBox>& boxes,
                                  const GridSpec& grid) {
  std::vector<const PlanarRigidMotion*> background;
  for (const auto& [g, m] : field) {
    const Eigen::Vector2d center = grid.ground_cell_center(g);
    const bool covered = std::any_of(boxes.begin(), boxes.end(), [&](const OrientedBox& b) {
      return b.footprint_contains(center);
    });
    if (!covered) background.push_back(&m);
  }
  if (background.empty())
    throw std::runtime_error("pool_ego_motion: no background cells");
  return pool_motions(background);
}

PlanarRigidMotion ego_pose_to_background_motion(const PlanarRigidMotion& ego) {
  if (!ego.is_world())
    throw std::invalid_argument("ego pose must be world-tagged");
  const double theta_bg = wrap_angle(-ego.theta);
  return PlanarRigidMotion::world(theta_bg, -(rot2(theta_bg) * ego.t));
}

PlanarRigidMotion background_motion_to_ego_pose(const PlanarRigidMotion& bg) {
  if (!bg.is_world())
    throw std::invalid_argument("background motion must be world-tagged");
  const double theta = wrap_angle(-bg.theta);
  return PlanarRigidMotion::world(theta, -(rot2(theta) * bg.t));
}

namespace {

// Highest-score box whose footprint contains p; -1 when none. Counts points
// claimed by more than one footprint.
int owning_box(const std::vector<OrientedBox>& boxes, const Eigen::Vector2d& p,
               int* multi_hits) {
  int best = -1;
  int hits = 0;
  for (int b = 0; b < static_cast<int>(boxes.size()); ++b) {
    if (!boxes[b].footprint_contains(p)) continue;
    ++hits;
    if (best < 0 || boxes[b].score > boxes[best].score) best = b;
  }
  if (hits > 1 && multi_hits != nullptr) ++(*multi_hits);
  return best;
}

}  // namespace

FlowField synthesize_point_flow(const std::vector<OrientedBox>& boxes,
                                const std::vector<PlanarRigidMotion>& motions,
                                const PlanarRigidMotion& ego, const PointCloud& cloud,
                                int* multi_box_warnings) {
  if (boxes.size() != motions.size())
    throw std::invalid_argument("synthesize_point_flow: boxes/motions size mismatch");
  for (const auto& m : motions)
    if (!m.is_world()) throw std::invalid_argument("object motions must be world-tagged");
  if (!ego.is_world()) throw std::invalid_argument("ego must be world-tagged");

  const Eigen::Matrix2d ego_rt = rot2(ego.theta).transpose();
  FlowField flow;
  flow.reserve(cloud.size());
  for (const auto& p : cloud.points) {
    const int b = owning_box(boxes, p.head<2>(), multi_box_warnings);
    if (b >= 0) {
      flow.push_back(flow_from_local_motion(p, Eigen::Vector2d::Zero(), motions[b]));
    } else {
      const Eigen::Vector2d moved = ego_rt * (p.head<2>() - ego.t);
      flow.emplace_back(moved.x() - p.x(), moved.y() - p.y(), 0.0);
    }
  }
  return flow;
}

GroundTruthField synthesize_gt(const std::vector<OrientedBox>& boxes,
                               const std::vector<PlanarRigidMotion>& motions,
                               const PlanarRigidMotion& ego, const PointCloud& cloud,
                               const SparseVoxelGrid& grid) {
  GroundTruthField out;
  out.flow = synthesize_point_flow(boxes, motions, ego, cloud, &out.multi_box_points);

  const PlanarRigidMotion background = ego_pose_to_background_motion(ego);
  for (const auto& [c, cell] : grid.cells) {
    const GroundIndex g{c.i, c.j};
    if (out.cell_world.count(g) > 0) continue;
    const Eigen::Vector2d center = grid.spec.ground_cell_center(g);
    const int b = owning_box(boxes, center, nullptr);
    const PlanarRigidMotion& world = b >= 0 ? motions[b] : background;
    out.cell_world.emplace(g, world);
    out.cell_local.emplace(g, world_to_local(world, center));
  }
  return out;
}

}  // namespace rigidflow
