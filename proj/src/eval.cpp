// SPDX-FileCopyrightText: 2026 The rigidflow authors
// SPDX-License-Identifier: Apache-2.0

#include "rigidflow/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

#include "rigidflow/baselines.hpp"

namespace rigidflow {

EpeSplit epe(const FlowField& pred, const FlowField& gt,
             const std::vector<std::uint8_t>& fg_mask) {
  if (pred.size() != gt.size() || fg_mask.size() != gt.size())
    throw std::invalid_argument("epe: misaligned fields");
  double fg_sum = 0.0, bg_sum = 0.0;
  std::size_t fg_count = 0, bg_count = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double err = (pred[i] - gt[i]).norm();
    if (fg_mask[i] != 0) {
      fg_sum += err;
      ++fg_count;
    } else {
      bg_sum += err;
      ++bg_count;
    }
  }
  EpeSplit split;
  split.fg = fg_count > 0 ? fg_sum / static_cast<double>(fg_count) : 0.0;
  split.bg = bg_count > 0 ? bg_sum / static_cast<double>(bg_count) : 0.0;
  const std::size_t total = fg_count + bg_count;
  split.all = total > 0 ? (fg_sum + bg_sum) / static_cast<double>(total) : 0.0;
  return split;
}

ObjectMotionErrors object_motion_errors(const std::vector<OrientedBox>& pred_boxes,
                                        const std::vector<PlanarRigidMotion>& pred_motions,
                                        const std::vector<OrientedBox>& gt_boxes,
                                        const std::vector<PlanarRigidMotion>& gt_motions,
                                        double tp_iou) {
  if (pred_boxes.size() != pred_motions.size() || gt_boxes.size() != gt_motions.size())
    throw std::invalid_argument("object_motion_errors: boxes/motions size mismatch");

  struct Candidate {
    double iou;
    int pred;
    int gt;
  };
  std::vector<Candidate> candidates;
  for (int p = 0; p < static_cast<int>(pred_boxes.size()); ++p)
    for (int g = 0; g < static_cast<int>(gt_boxes.size()); ++g) {
      const double iou = ground_iou(pred_boxes[p], gt_boxes[g]);
      if (iou > tp_iou) candidates.push_back({iou, p, g});
    }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(b.iou, a.pred, a.gt) < std::tie(a.iou, b.pred, b.gt);
  });

  std::vector<std::uint8_t> pred_used(pred_boxes.size(), 0);
  std::vector<std::uint8_t> gt_used(gt_boxes.size(), 0);
  double rot_sum = 0.0, trans_sum = 0.0;
  int tp = 0;
  for (const auto& c : candidates) {
    if (pred_used[c.pred] != 0 || gt_used[c.gt] != 0) continue;
    pred_used[c.pred] = 1;
    gt_used[c.gt] = 1;
    ++tp;
    rot_sum += std::abs(wrap_angle(pred_motions[c.pred].theta - gt_motions[c.gt].theta));
    trans_sum += (pred_motions[c.pred].t - gt_motions[c.gt].t).norm();
  }

  ObjectMotionErrors errors;
  errors.tp = tp;
  errors.fp = static_cast<int>(pred_boxes.size()) - tp;
  errors.fn = static_cast<int>(gt_boxes.size()) - tp;
  errors.rot_err = tp > 0 ? rot_sum / tp : 0.0;
  errors.trans_err = tp > 0 ? trans_sum / tp : 0.0;
  return errors;
}

std::pair<double, double> ego_errors(const PlanarRigidMotion& pred,
                                     const PlanarRigidMotion& gt) {
  if (!pred.is_world() || !gt.is_world())
    throw std::invalid_argument("ego_errors: motions must be world-tagged");
  return {std::abs(wrap_angle(pred.theta - gt.theta)), (pred.t - gt.t).norm()};
}

namespace {

PlanarRigidMotion planar_icp_motion(const std::vector<Eigen::Vector3d>& src_points,
                                    const PointCloud& dst, const PipelineConfig& cfg) {
  if (src_points.size() < 3)
    return PlanarRigidMotion::world(0.0, Eigen::Vector2d::Zero());
  PointCloud src;
  src.points = src_points;
  return icp(src, dst, cfg.icp_max_iter, cfg.icp_tol).motion.to_planar();
}

Eigen::Vector3d planar_motion_flow(const Eigen::Vector3d& p, const PlanarRigidMotion& m) {
  return flow_from_local_motion(p, Eigen::Vector2d::Zero(), m);
}

}  // namespace

EvalReport run_pipeline(const AugmentedScenePair& pair, const PipelineConfig& cfg,
                        PipelineMode mode) {
  if (pair.flow.size() != pair.scan_t.size())
    throw std::invalid_argument("run_pipeline: pair has no per-point ground-truth flow");

  const SparseVoxelGrid vox = voxelize(pair.scan_t, cfg.grid);

  std::vector<std::uint8_t> fg_mask(pair.scan_t.size(), 0);
  for (std::size_t i = 0; i < pair.scan_t.size(); ++i)
    for (const auto& box : pair.boxes)
      if (box.footprint_contains(pair.scan_t.points[i].head<2>())) {
        fg_mask[i] = 1;
        break;
      }

  const std::vector<OrientedBox> detections =
      nms(pair.boxes, cfg.nms_score_thresh, cfg.nms_overlap_thresh);

  MotionField field;
  FlowField pred_flow;

  if (mode == PipelineMode::GroundTruth) {
    const GroundTruthField gt_field =
        synthesize_gt(pair.boxes, pair.object_motions, pair.ego, pair.scan_t, vox);
    field = gt_field.cell_world;
    for (auto& [g, m] : field)
      m = PlanarRigidMotion::world(wrap_angle(m.theta + cfg.perturb.motion_dtheta),
                                   m.t + cfg.perturb.motion_dt);
    pred_flow = pair.flow;
    for (auto& v : pred_flow) v += cfg.perturb.flow_delta;
  } else {
    // per-detection ICP of the footprint points against the whole next scan,
    // the remaining points fit the background/ego motion
    std::vector<PlanarRigidMotion> det_motions(detections.size());
    std::vector<std::vector<Eigen::Vector3d>> det_points(detections.size());
    std::vector<Eigen::Vector3d> background_points;
    std::vector<int> owner(pair.scan_t.size(), -1);
    for (std::size_t i = 0; i < pair.scan_t.size(); ++i) {
      const Eigen::Vector2d xy = pair.scan_t.points[i].head<2>();
      int best = -1;
      for (int d = 0; d < static_cast<int>(detections.size()); ++d)
        if (detections[d].footprint_contains(xy) &&
            (best < 0 || detections[d].score > detections[best].score))
          best = d;
      owner[i] = best;
      if (best >= 0)
        det_points[best].push_back(pair.scan_t.points[i]);
      else
        background_points.push_back(pair.scan_t.points[i]);
    }
    for (std::size_t d = 0; d < detections.size(); ++d)
      det_motions[d] = planar_icp_motion(det_points[d], pair.scan_t1, cfg);
    const PlanarRigidMotion bg_motion =
        planar_icp_motion(background_points, pair.scan_t1, cfg);

    for (const auto& [c, cell] : vox.cells) {
      const GroundIndex g{c.i, c.j};
      if (field.count(g) > 0) continue;
      const Eigen::Vector2d center = cfg.grid.ground_cell_center(g);
      int best = -1;
      for (int d = 0; d < static_cast<int>(detections.size()); ++d)
        if (detections[d].footprint_contains(center) &&
            (best < 0 || detections[d].score > detections[best].score))
          best = d;
      field.emplace(g, best >= 0 ? det_motions[best] : bg_motion);
    }

    pred_flow.resize(pair.scan_t.size());
    for (std::size_t i = 0; i < pair.scan_t.size(); ++i) {
      const PlanarRigidMotion& m = owner[i] >= 0 ? det_motions[owner[i]] : bg_motion;
      pred_flow[i] = planar_motion_flow(pair.scan_t.points[i], m);
    }
  }

  EvalReport report;
  const EpeSplit split = epe(pred_flow, pair.flow, fg_mask);
  report.epe_fg = split.fg;
  report.epe_bg = split.bg;
  report.epe_all = split.all;

  std::vector<PlanarRigidMotion> pooled;
  pooled.reserve(detections.size());
  for (const auto& det : detections)
    pooled.push_back(pool_object_motion(field, det, cfg.grid));
  const ObjectMotionErrors obj =
      object_motion_errors(detections, pooled, pair.boxes, pair.object_motions, cfg.tp_iou);
  report.object_rot_err = obj.rot_err;
  report.object_trans_err = obj.trans_err;
  report.tp = obj.tp;
  report.fp = obj.fp;
  report.fn = obj.fn;

  const PlanarRigidMotion pooled_bg = pool_ego_motion(field, detections, cfg.grid);
  const auto [ego_rot, ego_trans] =
      ego_errors(background_motion_to_ego_pose(pooled_bg), pair.ego);
  report.ego_rot_err = ego_rot;
  report.ego_trans_err = ego_trans;
  return report;
}

std::string report_to_text(const EvalReport& r) {
  std::ostringstream out;
  out.precision(9);
  out << "flow_fg\tflow_bg\tflow_all\tobj_rot\tobj_tr\tego_rot\tego_tr\ttp\tfp\tfn\n";
  out << r.epe_fg << '\t' << r.epe_bg << '\t' << r.epe_all << '\t' << r.object_rot_err
      << '\t' << r.object_trans_err << '\t' << r.ego_rot_err << '\t' << r.ego_trans_err
      << '\t' << r.tp << '\t' << r.fp << '\t' << r.fn << '\n';
  return out.str();
}

std::string report_to_json_string(const EvalReport& r) {
  nlohmann::json j{{"scene_flow", {{"fg", r.epe_fg}, {"bg", r.epe_bg}, {"all", r.epe_all}}},
                   {"object_motion", {{"rot", r.object_rot_err}, {"tr", r.object_trans_err}}},
                   {"detections", {{"tp", r.tp}, {"fp", r.fp}, {"fn", r.fn}}},
                   {"ego_motion", {{"rot", r.ego_rot_err}, {"tr", r.ego_trans_err}}}};
  return j.dump(2);
}

}  // namespace rigidflow
