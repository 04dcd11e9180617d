// SPDX-FileCopyrightText: 2026 The rigidflow authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include "rigidflow/augmentor.hpp"
#include "rigidflow/baselines.hpp"
#include "rigidflow/config.hpp"
#include "rigidflow/eval.hpp"
#include "rigidflow/pcio.hpp"
#include "rigidflow/rigidmotion.hpp"
#include "rigidflow/voxelgrid.hpp"

namespace fs = std::filesystem;
using namespace rigidflow;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
};

ToolkitConfig resolve_config(const GlobalOptions& globals) {
  if (globals.config_path.empty()) return ToolkitConfig{};
  return load_config(globals.config_path);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
}

int run_augment(const GlobalOptions& globals, const std::string& scan_path,
                const std::string& mesh_dir) {
  const ToolkitConfig cfg = resolve_config(globals);
  const PointCloud scene = read_velodyne_bin(scan_path);

  std::vector<TriangleMesh> meshes;
  std::vector<fs::path> mesh_files;
  for (const auto& entry : fs::directory_iterator(mesh_dir))
    if (entry.path().extension() == ".obj") mesh_files.push_back(entry.path());
  std::sort(mesh_files.begin(), mesh_files.end());
  for (const auto& path : mesh_files) meshes.push_back(read_mesh(path));
  if (meshes.empty()) throw std::runtime_error("no .obj meshes in " + mesh_dir);

  const AugmentedScenePair pair =
      make_pair(scene, meshes, cfg.sensor, cfg.augmentor, globals.seed);

  const fs::path out = globals.out_dir.empty() ? fs::path("pair_out") : fs::path(globals.out_dir);
  const fs::path manifest = write_scene_pair(pair, out);
  std::cout << "wrote " << manifest.string() << " (" << pair.boxes.size() << " cars, "
            << pair.scan_t.size() << " points at t, " << pair.scan_t1.size()
            << " at t+1, ego " << pair.ego_mode << ")\n";
  return 0;
}

int run_evaluate(const GlobalOptions& globals, const std::string& pair_path,
                 const std::string& mode_name, const Perturbation& perturb) {
  const ToolkitConfig cfg = resolve_config(globals);

  fs::path manifest(pair_path);
  if (fs::is_directory(manifest)) manifest /= "manifest.json";
  const AugmentedScenePair pair = read_scene_pair(manifest);

  PipelineConfig pipeline;
  pipeline.grid = cfg.grid;
  pipeline.grid.rng_seed = globals.seed;
  pipeline.nms_score_thresh = cfg.nms_score_thresh;
  pipeline.nms_overlap_thresh = cfg.nms_overlap_thresh;
  pipeline.tp_iou = cfg.tp_iou;
  pipeline.perturb = perturb;

  const PipelineMode mode =
      mode_name == "icp" ? PipelineMode::IcpBaseline : PipelineMode::GroundTruth;
  const EvalReport report = run_pipeline(pair, pipeline, mode);

  std::cout << report_to_text(report);
  if (!globals.out_dir.empty()) {
    fs::create_directories(globals.out_dir);
    write_text(fs::path(globals.out_dir) / "report.txt", report_to_text(report));
    write_text(fs::path(globals.out_dir) / "report.json", report_to_json_string(report));
  }
  return 0;
}

int run_icp_flow(const GlobalOptions& globals, const std::string& src_path,
                 const std::string& dst_path) {
  const PointCloud src = read_velodyne_bin(src_path);
  const PointCloud dst = read_velodyne_bin(dst_path);
  const IcpResult result = icp(src, dst);

  const PlanarRigidMotion planar = result.motion.to_planar();
  std::cout << "iterations\t" << result.iterations << "\n"
            << "converged\t" << (result.converged ? "yes" : "no") << "\n"
            << "mean_residual\t" << result.mean_residual << "\n"
            << "theta\t" << planar.theta << "\n"
            << "tx\t" << planar.t.x() << "\n"
            << "ty\t" << planar.t.y() << "\n"
            << "tz\t" << result.motion.translation.z() << "\n";

  if (!globals.out_dir.empty()) {
    FlowField flow(src.size());
    for (std::size_t i = 0; i < src.size(); ++i)
      flow[i] = result.motion.apply(src.points[i]) - src.points[i];
    fs::create_directories(globals.out_dir);
    write_flow_bin(flow, fs::path(globals.out_dir) / "flow.bin");
    std::cout << "wrote " << (fs::path(globals.out_dir) / "flow.bin").string() << "\n";
  }
  return 0;
}

int run_equivariance(int grid_n, double theta_max, double theta_step, double spacing) {
  std::vector<double> thetas;
  for (double theta = theta_step; theta <= theta_max + 1e-12; theta += theta_step)
    thetas.push_back(theta);
  const auto rows = stationarity_experiment(grid_n, thetas, spacing);
  std::cout << "theta\tworld_spread\tclosed_form\tlocal_spread\n";
  std::cout.precision(12);
  for (const auto& row : rows)
    std::cout << row.theta << '\t' << row.world_spread << '\t'
              << row.world_spread_closed_form << '\t' << row.local_spread << '\n';
  return 0;
}

int run_voxelize(const GlobalOptions& globals, const std::string& scan_path) {
  const ToolkitConfig cfg = resolve_config(globals);
  GridSpec spec = cfg.grid;
  spec.rng_seed = globals.seed;
  const PointCloud cloud = read_velodyne_bin(scan_path);
  const SparseVoxelGrid grid = voxelize(cloud, spec);

  std::cout << "points\t" << grid.total_points << "\n"
            << "occupied_cells\t" << grid.cells.size() << "\n"
            << "retained\t" << grid.retained_points() << "\n"
            << "discarded_over_cap\t" << grid.discarded_over_cap << "\n"
            << "dropped_out_of_bounds\t" << grid.dropped_out_of_bounds << "\n";

  if (!globals.out_dir.empty()) {
    fs::create_directories(globals.out_dir);
    std::ofstream out(fs::path(globals.out_dir) / "cells.tsv", std::ios::trunc);
    out << "i\tj\tk\tcount";
    for (int f = 0; f < kVoxelFeatureSize; ++f) out << "\tf" << f;
    out << "\n";
    out.precision(9);
    for (const auto& [c, cell] : grid.cells) {
      out << c.i << '\t' << c.j << '\t' << c.k << '\t' << cell.point_indices.size();
      for (int f = 0; f < kVoxelFeatureSize; ++f) out << '\t' << cell.feature(f);
      out << '\n';
    }
    std::cout << "wrote " << (fs::path(globals.out_dir) / "cells.tsv").string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LIDAR rigid-motion toolkit: scan augmentation, motion decoding and evaluation"};
  app.require_subcommand(1);

  GlobalOptions globals;
  app.add_option("--config", globals.config_path, "config file (JSON)");
  app.add_option("--seed", globals.seed, "random seed");
  app.add_option("--out", globals.out_dir, "output directory");

  std::string scan_path, mesh_dir;
  auto* augment = app.add_subcommand("augment", "simulate a scan pair with virtual cars");
  augment->add_option("--scan", scan_path, "input scan (.bin)")->required();
  augment->add_option("--meshes", mesh_dir, "directory of car meshes (.obj)")->required();

  std::string pair_path, mode_name = "gt";
  Perturbation perturb;
  auto* evaluate = app.add_subcommand("evaluate", "run the evaluation pipeline on a pair");
  evaluate->add_option("--pair", pair_path, "pair directory or manifest.json")->required();
  evaluate->add_option("--mode", mode_name, "gt or icp")
      ->check(CLI::IsMember({"gt", "icp"}));
  evaluate->add_option("--perturb-theta", perturb.motion_dtheta, "rotation offset (rad)");
  evaluate->add_option("--perturb-tx", perturb.motion_dt.x(), "translation offset x (m)");
  evaluate->add_option("--perturb-ty", perturb.motion_dt.y(), "translation offset y (m)");
  evaluate->add_option("--perturb-flow-x", perturb.flow_delta.x(), "flow offset x (m)");
  evaluate->add_option("--perturb-flow-y", perturb.flow_delta.y(), "flow offset y (m)");
  evaluate->add_option("--perturb-flow-z", perturb.flow_delta.z(), "flow offset z (m)");

  std::string src_path, dst_path;
  auto* icp_flow = app.add_subcommand("icp-flow", "ICP between two scans, flow out");
  icp_flow->add_option("--src", src_path, "scan at t (.bin)")->required();
  icp_flow->add_option("--dst", dst_path, "scan at t+1 (.bin)")->required();

  int grid_n = 10;
  double theta_max = 1.0, theta_step = 0.1, spacing = 1.0;
  auto* equivariance = app.add_subcommand(
      "experiment-equivariance", "world vs local target spread over rotation magnitude");
  equivariance->add_option("--grid-n", grid_n, "grid side length");
  equivariance->add_option("--theta-max", theta_max, "largest rotation (rad)");
  equivariance->add_option("--theta-step", theta_step, "rotation step (rad)");
  equivariance->add_option("--spacing", spacing, "grid spacing (m)");

  std::string vox_scan;
  auto* vox = app.add_subcommand("voxelize", "voxelize a scan and report cell statistics");
  vox->add_option("--scan", vox_scan, "input scan (.bin)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (augment->parsed()) return run_augment(globals, scan_path, mesh_dir);
    if (evaluate->parsed()) return run_evaluate(globals, pair_path, mode_name, perturb);
    if (icp_flow->parsed()) return run_icp_flow(globals, src_path, dst_path);
    if (equivariance->parsed())
      return run_equivariance(grid_n, theta_max, theta_step, spacing);
    if (vox->parsed()) return run_voxelize(globals, vox_scan);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
