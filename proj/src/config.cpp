// SPDX-FileCopyrightText: 2026 The rigidflow authors
// SPDX-License-Identifier: Apache-2.0

#include "rigidflow/config.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace rigidflow {

namespace {

using nlohmann::json;

Eigen::Vector3d vec3(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

void parse_grid(const json& j, GridSpec& grid) {
  if (j.contains("origin")) grid.origin = vec3(j.at("origin"));
  if (j.contains("voxel_size")) grid.voxel_size = vec3(j.at("voxel_size"));
  if (j.contains("extents")) {
    const auto& e = j.at("extents");
    grid.extents = {e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<int>()};
  }
  if (j.contains("sample_cap")) grid.sample_cap = j.at("sample_cap").get<int>();
  if (!grid.valid()) throw std::runtime_error("config: invalid grid spec");
}

void parse_sensor(const json& j, SensorModel& sensor) {
  if (j.contains("azimuth_resolution_deg"))
    sensor.azimuth_resolution = j.at("azimuth_resolution_deg").get<double>() * kPi / 180.0;
  if (j.contains("elevation_channels")) {
    const int channels = j.at("elevation_channels").get<int>();
    const double lo = j.value("elevation_min_deg", -24.8) * kPi / 180.0;
    const double hi = j.value("elevation_max_deg", 2.0) * kPi / 180.0;
    if (channels < 1) throw std::runtime_error("config: elevation_channels must be >= 1");
    sensor.elevations.resize(channels);
    for (int i = 0; i < channels; ++i)
      sensor.elevations[i] =
          channels == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (channels - 1);
  }
  if (j.contains("noise_a")) sensor.noise_a = j.at("noise_a").get<double>();
  if (j.contains("noise_b")) sensor.noise_b = j.at("noise_b").get<double>();
  if (j.contains("dropout")) sensor.dropout = j.at("dropout").get<double>();
  if (j.contains("max_range")) sensor.max_range = j.at("max_range").get<double>();
  if (!sensor.valid()) throw std::runtime_error("config: invalid sensor model");
}

void parse_augmentor(const json& j, AugmentorConfig& cfg) {
  cfg.min_cars = j.value("cars_min", cfg.min_cars);
  cfg.max_cars = j.value("cars_max", cfg.max_cars);
  if (j.contains("speed_range")) {
    cfg.speed_min = j.at("speed_range").at(0).get<double>();
    cfg.speed_max = j.at("speed_range").at(1).get<double>();
  }
  if (j.contains("curvature_range")) {
    cfg.curvature_min = j.at("curvature_range").at(0).get<double>();
    cfg.curvature_max = j.at("curvature_range").at(1).get<double>();
  }
  cfg.dt = j.value("dt", cfg.dt);
  cfg.region_cell = j.value("region_cell", cfg.region_cell);
  cfg.ransac_iters = j.value("ransac_iters", cfg.ransac_iters);
  cfg.ransac_thresh = j.value("ransac_thresh", cfg.ransac_thresh);
  if (j.contains("obstacle_band")) {
    cfg.obstacle_low = j.at("obstacle_band").at(0).get<double>();
    cfg.obstacle_high = j.at("obstacle_band").at(1).get<double>();
  }
  cfg.placement_margin = j.value("placement_margin", cfg.placement_margin);
  cfg.max_place_attempts = j.value("max_place_attempts", cfg.max_place_attempts);
  if (j.contains("ego_mode")) cfg.sample_ego = j.at("ego_mode").get<std::string>() == "sampled";
  if (cfg.min_cars < 1 || cfg.max_cars < cfg.min_cars)
    throw std::runtime_error("config: bad car count range");
}

}  // namespace

ToolkitConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  json j;
  in >> j;

  ToolkitConfig cfg;
  if (j.contains("grid")) parse_grid(j.at("grid"), cfg.grid);
  if (j.contains("sensor")) parse_sensor(j.at("sensor"), cfg.sensor);
  if (j.contains("loss_weights")) {
    const auto& w = j.at("loss_weights");
    cfg.weights.alpha = w.value("alpha", 1.0);
    cfg.weights.beta = w.value("beta", 1.0);
    cfg.weights.gamma = w.value("gamma", 1.0);
    cfg.weights.lambda = w.value("lambda", 1.0);
  }
  if (j.contains("thresholds")) {
    const auto& t = j.at("thresholds");
    cfg.nms_score_thresh = t.value("nms_tau", cfg.nms_score_thresh);
    cfg.nms_overlap_thresh = t.value("nms_overlap", cfg.nms_overlap_thresh);
    cfg.tp_iou = t.value("tp_iou", cfg.tp_iou);
    cfg.positive_iou = t.value("positive_iou", cfg.positive_iou);
    cfg.negative_iou = t.value("negative_iou", cfg.negative_iou);
  }
  if (j.contains("augmentor")) parse_augmentor(j.at("augmentor"), cfg.augmentor);
  return cfg;
}

}  // namespace rigidflow
