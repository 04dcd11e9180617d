// SPDX-FileCopyrightText: 2026 The rigidflow authors
// SPDX-License-Identifier: Apache-2.0

#include "rigidflow/losses.hpp"

#include <cmath>
#include <stdexcept>

#include "rigidflow/decoder.hpp"

namespace rigidflow {

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " not finite");
}

}  // namespace

double flow_loss(const FlowField& pred, const FlowField& gt) {
  if (pred.size() != gt.size())
    throw std::invalid_argument("flow_loss: cardinality mismatch");
  if (pred.empty()) throw std::invalid_argument("flow_loss: empty fields");
  double sum = 0.0;
  for (std::size_t j = 0; j < pred.size(); ++j)
    sum += (pred[j] - gt[j]).cwiseAbs().sum();
  return sum / static_cast<double>(pred.size());
}

FlowField flow_loss_grad(const FlowField& pred, const FlowField& gt) {
  if (pred.size() != gt.size())
    throw std::invalid_argument("flow_loss_grad: cardinality mismatch");
  if (pred.empty()) throw std::invalid_argument("flow_loss_grad: empty fields");
  const double k = static_cast<double>(pred.size());
  FlowField grad(pred.size());
  for (std::size_t j = 0; j < pred.size(); ++j)
    grad[j] = (pred[j] - gt[j]).unaryExpr([](double d) { return sign(d); }) / k;
  return grad;
}

namespace {

void check_local_pair(const std::vector<PlanarRigidMotion>& pred,
                      const std::vector<PlanarRigidMotion>& gt) {
  if (pred.size() != gt.size())
    throw std::invalid_argument("rigmo_loss: cardinality mismatch");
  if (pred.empty()) throw std::invalid_argument("rigmo_loss: empty fields");
  for (std::size_t j = 0; j < pred.size(); ++j)
    if (pred[j].is_world() || gt[j].is_world())
      throw std::invalid_argument("rigmo_loss: motions must be local-tagged");
}

}  // namespace

double rigmo_loss(const std::vector<PlanarRigidMotion>& pred,
                  const std::vector<PlanarRigidMotion>& gt, double lambda) {
  check_local_pair(pred, gt);
  double sum = 0.0;
  for (std::size_t j = 0; j < pred.size(); ++j) {
    sum += (pred[j].t - gt[j].t).cwiseAbs().sum();
    sum += lambda * std::abs(wrap_angle(pred[j].theta - gt[j].theta));
  }
  return sum / static_cast<double>(pred.size());
}

std::vector<PlanarMotionGrad> rigmo_loss_grad(const std::vector<PlanarRigidMotion>& pred,
                                              const std::vector<PlanarRigidMotion>& gt,
                                              double lambda) {
  check_local_pair(pred, gt);
  const double k = static_cast<double>(pred.size());
  std::vector<PlanarMotionGrad> grads(pred.size());
  for (std::size_t j = 0; j < pred.size(); ++j) {
    grads[j].t = (pred[j].t - gt[j].t).unaryExpr([](double d) { return sign(d); }) / k;
    grads[j].theta = lambda * sign(wrap_angle(pred[j].theta - gt[j].theta)) / k;
  }
  return grads;
}

double ego_loss(const PlanarRigidMotion& pred, const PlanarRigidMotion& gt, double lambda) {
  if (!pred.is_world() || !gt.is_world())
    throw std::invalid_argument("ego_loss: motions must be world-tagged");
  return (pred.t - gt.t).cwiseAbs().sum() +
         lambda * std::abs(wrap_angle(pred.theta - gt.theta));
}

PlanarMotionGrad ego_loss_grad(const PlanarRigidMotion& pred, const PlanarRigidMotion& gt,
                               double lambda) {
  if (!pred.is_world() || !gt.is_world())
    throw std::invalid_argument("ego_loss_grad: motions must be world-tagged");
  PlanarMotionGrad g;
  g.t = (pred.t - gt.t).unaryExpr([](double d) { return sign(d); });
  g.theta = lambda * sign(wrap_angle(pred.theta - gt.theta));
  return g;
}

Residual7 box_residual(const OrientedBox& gt, const OrientedBox& anchor) {
  const double diag = std::hypot(anchor.size.x(), anchor.size.y());
  Residual7 r;
  r(0) = (gt.center.x() - anchor.center.x()) / diag;
  r(1) = (gt.center.y() - anchor.center.y()) / diag;
  r(2) = (gt.center.z() - anchor.center.z()) / anchor.size.z();
  r(3) = std::log(gt.size.x() / anchor.size.x());
  r(4) = std::log(gt.size.y() / anchor.size.y());
  r(5) = std::log(gt.size.z() / anchor.size.z());
  r(6) = wrap_angle(gt.yaw - anchor.yaw);
  return r;
}

ProposalMatch match_proposals(const std::vector<OrientedBox>& proposals,
                              const std::vector<OrientedBox>& gts,
                              double positive_iou, double negative_iou) {
  const int np = static_cast<int>(proposals.size());
  const int ng = static_cast<int>(gts.size());

  ProposalMatch match;
  match.labels.assign(np, ProposalLabel::Negative);
  match.matched_gt.assign(np, -1);
  match.residuals.assign(np, Residual7::Zero());

  std::vector<std::vector<double>> iou(np, std::vector<double>(ng, 0.0));
  for (int p = 0; p < np; ++p)
    for (int g = 0; g < ng; ++g) iou[p][g] = ground_iou(proposals[p], gts[g]);

  std::vector<int> argmax_for_gt(ng, -1);
  for (int g = 0; g < ng; ++g) {
    double best = 0.0;
    for (int p = 0; p < np; ++p) {
      if (iou[p][g] > best) {
        best = iou[p][g];
        argmax_for_gt[g] = p;
      }
    }
  }

  for (int p = 0; p < np; ++p) {
    double best = 0.0;
    int best_gt = -1;
    for (int g = 0; g < ng; ++g) {
      if (iou[p][g] > best) {
        best = iou[p][g];
        best_gt = g;
      }
    }

    bool positive = best > positive_iou;
    for (int g = 0; g < ng && !positive; ++g)
      if (argmax_for_gt[g] == p) {
        positive = true;
        best_gt = best_gt < 0 ? g : best_gt;
      }

    if (positive) {
      match.labels[p] = ProposalLabel::Positive;
      match.matched_gt[p] = best_gt;
      match.residuals[p] = box_residual(gts[best_gt], proposals[p]);
    } else if (best < negative_iou) {
      match.labels[p] = ProposalLabel::Negative;
    } else {
      match.labels[p] = ProposalLabel::Ignored;
    }
  }
  return match;
}

double smooth_l1(double x) {
  const double a = std::abs(x);
  return a < 1.0 ? 0.5 * x * x : a - 0.5;
}

double smooth_l1_grad(double x) {
  return std::abs(x) < 1.0 ? x : sign(x);
}

double binary_cross_entropy(double p, int target) {
  if (p <= 0.0 || p >= 1.0)
    throw std::invalid_argument("binary_cross_entropy: p must lie in (0, 1)");
  return target == 1 ? -std::log(p) : -std::log(1.0 - p);
}

double det_loss(const std::vector<double>& pos_probs, const std::vector<double>& neg_probs,
                const std::vector<Residual7>& residual_pred,
                const std::vector<Residual7>& residual_gt) {
  if (pos_probs.empty() && neg_probs.empty())
    throw std::invalid_argument("det_loss: no proposals");
  if (residual_pred.size() != pos_probs.size() || residual_gt.size() != pos_probs.size())
    throw std::invalid_argument("det_loss: residual count must match positive count");

  double loss = 0.0;
  if (!pos_probs.empty()) {
    double pos_sum = 0.0;
    for (std::size_t k = 0; k < pos_probs.size(); ++k) {
      pos_sum += binary_cross_entropy(pos_probs[k], 1);
      const Residual7 d = residual_pred[k] - residual_gt[k];
      for (int i = 0; i < 7; ++i) pos_sum += smooth_l1(d(i));
    }
    loss += pos_sum / static_cast<double>(pos_probs.size());
  }
  if (!neg_probs.empty()) {
    double neg_sum = 0.0;
    for (double p : neg_probs) neg_sum += binary_cross_entropy(p, 0);
    loss += neg_sum / static_cast<double>(neg_probs.size());
  }
  return loss;
}

DetLossGrad det_loss_grad(const std::vector<double>& pos_probs,
                          const std::vector<double>& neg_probs,
                          const std::vector<Residual7>& residual_pred,
                          const std::vector<Residual7>& residual_gt) {
  if (pos_probs.empty() && neg_probs.empty())
    throw std::invalid_argument("det_loss_grad: no proposals");
  if (residual_pred.size() != pos_probs.size() || residual_gt.size() != pos_probs.size())
    throw std::invalid_argument("det_loss_grad: residual count must match positive count");

  DetLossGrad grad;
  const double m_pos = static_cast<double>(pos_probs.size());
  const double m_neg = static_cast<double>(neg_probs.size());
  grad.pos_probs.resize(pos_probs.size());
  grad.residual_pred.resize(pos_probs.size());
  for (std::size_t k = 0; k < pos_probs.size(); ++k) {
    grad.pos_probs[k] = -1.0 / (pos_probs[k] * m_pos);
    const Residual7 d = residual_pred[k] - residual_gt[k];
    Residual7 g;
    for (int i = 0; i < 7; ++i) g(i) = smooth_l1_grad(d(i)) / m_pos;
    grad.residual_pred[k] = g;
  }
  grad.neg_probs.resize(neg_probs.size());
  for (std::size_t l = 0; l < neg_probs.size(); ++l)
    grad.neg_probs[l] = 1.0 / ((1.0 - neg_probs[l]) * m_neg);
  return grad;
}

double total_loss(const LossParts& parts, const LossWeights& weights) {
  check_finite(parts.flow, "flow loss");
  check_finite(parts.rigmo, "rigmo loss");
  check_finite(parts.ego, "ego loss");
  check_finite(parts.det, "det loss");
  return weights.alpha * parts.flow + weights.beta * parts.rigmo +
         weights.gamma * parts.ego + parts.det;
}

}  // namespace rigidflow
