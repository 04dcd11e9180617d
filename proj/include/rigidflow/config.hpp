// SPDX-FileCopyrightText: 2026 The rigidflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include "rigidflow/augmentor.hpp"
#include "rigidflow/eval.hpp"
#include "rigidflow/losses.hpp"
#include "rigidflow/voxelgrid.hpp"

namespace rigidflow {

// Everything the CLI can configure, with working defaults. A config file
// only needs the keys it wants to override.
struct ToolkitConfig {
  GridSpec grid;
  SensorModel sensor = SensorModel::velodyne64();
  LossWeights weights;
  double nms_score_thresh = 0.5;
  double nms_overlap_thresh = 0.1;
  double tp_iou = 0.5;
  double positive_iou = 0.6;
  double negative_iou = 0.45;
  AugmentorConfig augmentor;
};

ToolkitConfig load_config(const std::filesystem::path& path);

}  // namespace rigidflow
