// SPDX-FileCopyrightText: 2026 The rigidflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <vector>

#include "rigidflow/geometry.hpp"
#include "rigidflow/rigidmotion.hpp"

namespace rigidflow {

// Weights of the combined objective:
//   L = alpha * L_flow + beta * L_rigmo + gamma * L_ego + L_det
// lambda balances translation against rotation inside the motion losses.
struct LossWeights {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  double lambda = 1.0;
};

// Mean l1 distance between predicted and true flow over the K cells/points.
double flow_loss(const FlowField& pred, const FlowField& gt);
FlowField flow_loss_grad(const FlowField& pred, const FlowField& gt);

struct PlanarMotionGrad {
  Eigen::Vector2d t = Eigen::Vector2d::Zero();
  double theta = 0.0;
};

// Mean per-cell l1 error of local-frame translations plus lambda times the
// wrapped absolute rotation error. Both sides must be local-tagged (convert
// via world_to_local first).
double rigmo_loss(const std::vector<PlanarRigidMotion>& pred,
                  const std::vector<PlanarRigidMotion>& gt, double lambda);
std::vector<PlanarMotionGrad> rigmo_loss_grad(const std::vector<PlanarRigidMotion>& pred,
                                              const std::vector<PlanarRigidMotion>& gt,
                                              double lambda);

// Same shape for the single background/ego motion, world-tagged.
double ego_loss(const PlanarRigidMotion& pred, const PlanarRigidMotion& gt, double lambda);
PlanarMotionGrad ego_loss_grad(const PlanarRigidMotion& pred, const PlanarRigidMotion& gt,
                               double lambda);

enum class ProposalLabel { Positive, Negative, Ignored };

// Box regression target for a positive proposal, relative to its anchor:
// center deltas normalized by the anchor's ground diagonal (z by the anchor
// height), log size ratios and the wrapped yaw delta.
using Residual7 = Eigen::Matrix<double, 7, 1>;
Residual7 box_residual(const OrientedBox& gt, const OrientedBox& anchor);

// Proposal matching: a proposal is positive when it holds the highest
// footprint IoU for some ground-truth box (with nonzero overlap) or when its
// IoU with any ground truth exceeds positive_iou; negative when its best IoU
// falls below negative_iou; ignored otherwise.
struct ProposalMatch {
  std::vector<ProposalLabel> labels;
  std::vector<int> matched_gt;          // -1 when unmatched
  std::vector<Residual7> residuals;     // zero rows for non-positives
};
ProposalMatch match_proposals(const std::vector<OrientedBox>& proposals,
                              const std::vector<OrientedBox>& gts,
                              double positive_iou = 0.6, double negative_iou = 0.45);

double smooth_l1(double x);       // 0.5 x^2 inside |x| < 1, |x| - 0.5 outside
double smooth_l1_grad(double x);
double binary_cross_entropy(double p, int target);  // target 0 or 1, p in (0,1)

// Detection loss: positives pay classification towards 1 plus smooth-l1 on
// the residual, negatives pay classification towards 0, each normalized by
// its own count. Throws when both sets are empty.
double det_loss(const std::vector<double>& pos_probs, const std::vector<double>& neg_probs,
                const std::vector<Residual7>& residual_pred,
                const std::vector<Residual7>& residual_gt);

struct DetLossGrad {
  std::vector<double> pos_probs;
  std::vector<double> neg_probs;
  std::vector<Residual7> residual_pred;
};
DetLossGrad det_loss_grad(const std::vector<double>& pos_probs,
                          const std::vector<double>& neg_probs,
                          const std::vector<Residual7>& residual_pred,
                          const std::vector<Residual7>& residual_gt);

struct LossParts {
  double flow = 0.0;
  double rigmo = 0.0;
  double ego = 0.0;
  double det = 0.0;
};
double total_loss(const LossParts& parts, const LossWeights& weights);

}  // namespace rigidflow
