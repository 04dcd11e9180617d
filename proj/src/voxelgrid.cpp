// SPDX-FileCopyrightText: 2026 The rigidflow authors
// SPDX-License-Identifier: Apache-2.0

#include "rigidflow/voxelgrid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rigidflow/rng.hpp"

namespace rigidflow {

namespace {

bool cell_of(const Eigen::Vector3d& p, const GridSpec& spec, CellIndex& out) {
  int idx[3];
  for (int a = 0; a < 3; ++a) {
    const double f = std::floor((p[a] - spec.origin[a]) / spec.voxel_size[a]);
    if (f < 0.0 || f >= static_cast<double>(spec.extents[a])) return false;
    idx[a] = static_cast<int>(f);
  }
  out = {idx[0], idx[1], idx[2]};
  return true;
}

// Uniform sample of `cap` entries, keyed on (seed, cell index) so the outcome
// does not depend on the order points were encountered in.
void sample_in_place(std::vector<int>& indices, int cap, const GridSpec& spec,
                     const CellIndex& c) {
  Rng rng(mix_seed(spec.rng_seed, static_cast<std::uint64_t>(c.i),
                   static_cast<std::uint64_t>(c.j), static_cast<std::uint64_t>(c.k)));
  const int n = static_cast<int>(indices.size());
  for (int m = 0; m < cap; ++m)
    std::swap(indices[m], indices[m + rng.uniform_int(0, n - 1 - m)]);
  indices.resize(cap);
  std::sort(indices.begin(), indices.end());
}

}  // namespace

SparseVoxelGrid voxelize(const PointCloud& cloud, const GridSpec& spec) {
  if (!spec.valid()) throw std::invalid_argument("voxelize: invalid grid spec");

  SparseVoxelGrid grid;
  grid.spec = spec;
  grid.total_points = static_cast<std::int64_t>(cloud.size());

  for (int idx = 0; idx < static_cast<int>(cloud.size()); ++idx) {
    CellIndex c;
    if (!cell_of(cloud.points[idx], spec, c)) {
      ++grid.dropped_out_of_bounds;
      continue;
    }
    grid.cells[c].point_indices.push_back(idx);
  }

  for (auto& [c, cell] : grid.cells) {
    if (static_cast<int>(cell.point_indices.size()) > spec.sample_cap) {
      grid.discarded_over_cap +=
          static_cast<std::int64_t>(cell.point_indices.size()) - spec.sample_cap;
      sample_in_place(cell.point_indices, spec.sample_cap, spec, c);
    }
    cell.feature = encode_cell(cloud, cell.point_indices, spec.voxel_center(c), spec);
  }
  return grid;
}

VoxelFeature encode_cell(const PointCloud& cloud, const std::vector<int>& indices,
                         const Eigen::Vector3d& voxel_center, const GridSpec& spec) {
  if (indices.empty()) throw std::invalid_argument("encode_cell: empty cell");

  const double n = static_cast<double>(indices.size());
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (int idx : indices) centroid += cloud.points[idx];
  centroid /= n;

  double spread = 0.0;
  double refl = 0.0;
  for (int idx : indices) {
    spread += (cloud.points[idx] - centroid).norm();
    if (cloud.has_reflectance()) refl += cloud.reflectance[idx];
  }
  spread /= n;
  refl /= n;

  VoxelFeature f;
  f(0) = 1.0;
  f(1) = std::min(1.0, n / static_cast<double>(spec.sample_cap));
  f.segment<3>(2) = centroid - voxel_center;
  f(5) = spread;
  f(6) = refl;
  return f;
}

std::map<GroundIndex, Eigen::VectorXd> flatten_to_ground(const SparseVoxelGrid& grid) {
  const int depth = grid.spec.extents.z();
  std::map<GroundIndex, Eigen::VectorXd> columns;
  for (const auto& [c, cell] : grid.cells) {
    const GroundIndex g{c.i, c.j};
    auto [it, inserted] = columns.try_emplace(g);
    if (inserted) it->second = Eigen::VectorXd::Zero(depth * kVoxelFeatureSize);
    it->second.segment<kVoxelFeatureSize>(c.k * kVoxelFeatureSize) = cell.feature;
  }
  return columns;
}

}  // namespace rigidflow
