// SPDX-FileCopyrightText: 2026 The rigidflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rigidflow/decoder.hpp"
#include "rigidflow/pcio.hpp"
#include "rigidflow/voxelgrid.hpp"

namespace rigidflow {

// Scene-level metrics: endpoint error split over foreground (inside any
// ground-truth footprint), background and all points; rotation/translation
// errors averaged per object over true-positive detections; ego errors; and
// the detection counts.
struct EvalReport {
  double epe_fg = 0.0;
  double epe_bg = 0.0;
  double epe_all = 0.0;
  double object_rot_err = 0.0;
  double object_trans_err = 0.0;
  int tp = 0;
  int fp = 0;
  int fn = 0;
  double ego_rot_err = 0.0;
  double ego_trans_err = 0.0;
};

struct EpeSplit {
  double fg = 0.0;
  double bg = 0.0;
  double all = 0.0;
};

// Mean Euclidean endpoint error over foreground, background and all points.
// Empty splits report 0; `all` is the point-count-weighted combination.
EpeSplit epe(const FlowField& pred, const FlowField& gt,
             const std::vector<std::uint8_t>& fg_mask);

// Greedy highest-IoU matching above tp_iou defines the true positives; the
// errors are the mean wrapped |d theta| and mean ||d t||_2 over them.
struct ObjectMotionErrors {
  double rot_err = 0.0;
  double trans_err = 0.0;
  int tp = 0;
  int fp = 0;
  int fn = 0;
};
ObjectMotionErrors object_motion_errors(const std::vector<OrientedBox>& pred_boxes,
                                        const std::vector<PlanarRigidMotion>& pred_motions,
                                        const std::vector<OrientedBox>& gt_boxes,
                                        const std::vector<PlanarRigidMotion>& gt_motions,
                                        double tp_iou);

// (wrapped |d theta|, ||d t||_2) between two world-tagged motions.
std::pair<double, double> ego_errors(const PlanarRigidMotion& pred,
                                     const PlanarRigidMotion& gt);

enum class PipelineMode { GroundTruth, IcpBaseline };

// Uniform perturbation injected into the ground-truth field (GroundTruth
// mode only): added to every predicted flow vector and per-cell motion.
struct Perturbation {
  Eigen::Vector3d flow_delta = Eigen::Vector3d::Zero();
  double motion_dtheta = 0.0;
  Eigen::Vector2d motion_dt = Eigen::Vector2d::Zero();
};

struct PipelineConfig {
  GridSpec grid;
  double nms_score_thresh = 0.5;
  double nms_overlap_thresh = 0.1;
  double tp_iou = 0.5;
  Perturbation perturb;
  int icp_max_iter = 50;
  double icp_tol = 1e-8;
};

// Evaluation pipeline: voxelize scan_t, build a per-cell world motion field
// (ground truth with optional perturbation, or per-detection + background ICP
// against scan_t1), pool object and ego motions through the decoder and
// score everything against the manifest ground truth.
EvalReport run_pipeline(const AugmentedScenePair& pair, const PipelineConfig& cfg,
                        PipelineMode mode);

// One header + one row of tab-delimited values in the usual column order:
// scene flow FG/BG/All, object rotation/translation, ego rotation/translation,
// then TP/FP/FN.
std::string report_to_text(const EvalReport& report);
std::string report_to_json_string(const EvalReport& report);

}  // namespace rigidflow
