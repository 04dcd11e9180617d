// SPDX-FileCopyrightText: 2026 The rigidflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <compare>
#include <cstdint>
#include <map>
#include <vector>

#include "rigidflow/geometry.hpp"

namespace rigidflow {

struct CellIndex {
  int i = 0, j = 0, k = 0;
  auto operator<=>(const CellIndex&) const = default;
};

struct GroundIndex {
  int i = 0, j = 0;
  auto operator<=>(const GroundIndex&) const = default;
};

// Equally spaced voxel partition. Cells are half-open boxes
// [origin + idx*size, origin + (idx+1)*size) per axis; at most sample_cap
// points are retained per cell, drawn deterministically from rng_seed keyed
// on the cell index.
struct GridSpec {
  Eigen::Vector3d origin{-40.0, -40.0, -3.0};
  Eigen::Vector3d voxel_size{0.2, 0.2, 0.4};
  Eigen::Vector3i extents{400, 400, 10};  // (W, H, D); D = 10 vertical slabs
  int sample_cap = 35;                    // T
  std::uint64_t rng_seed = 0;

  bool valid() const {
    return voxel_size.minCoeff() > 0.0 && extents.minCoeff() > 0 && sample_cap >= 1;
  }
  Eigen::Vector3d voxel_center(const CellIndex& c) const {
    return origin + Eigen::Vector3d((c.i + 0.5) * voxel_size.x(),
                                    (c.j + 0.5) * voxel_size.y(),
                                    (c.k + 0.5) * voxel_size.z());
  }
  Eigen::Vector2d ground_cell_center(const GroundIndex& g) const {
    return {origin.x() + (g.i + 0.5) * voxel_size.x(),
            origin.y() + (g.j + 0.5) * voxel_size.y()};
  }
};

// Fixed per-cell statistics standing in for a learned voxel encoder:
// [occupancy, count/T clipped to 1, centroid offset from the voxel center
// (3), mean distance of the points from their centroid, mean reflectance].
inline constexpr int kVoxelFeatureSize = 7;
using VoxelFeature = Eigen::Matrix<double, kVoxelFeatureSize, 1>;

struct VoxelCell {
  std::vector<int> point_indices;  // ascending, at most sample_cap entries
  VoxelFeature feature = VoxelFeature::Zero();
};

// Only non-empty voxels are stored. The bookkeeping counters satisfy
// (retained + discarded_over_cap + dropped_out_of_bounds) == total_points.
struct SparseVoxelGrid {
  GridSpec spec;
  std::map<CellIndex, VoxelCell> cells;
  std::int64_t total_points = 0;
  std::int64_t dropped_out_of_bounds = 0;
  std::int64_t discarded_over_cap = 0;

  std::int64_t retained_points() const {
    std::int64_t n = 0;
    for (const auto& [idx, cell] : cells) n += static_cast<std::int64_t>(cell.point_indices.size());
    return n;
  }
};

SparseVoxelGrid voxelize(const PointCloud& cloud, const GridSpec& spec);

VoxelFeature encode_cell(const PointCloud& cloud, const std::vector<int>& indices,
                         const Eigen::Vector3d& voxel_center, const GridSpec& spec);

// Collapses the vertical dimension: ground cell (i, j) maps to the D vertical
// cell features concatenated bottom-up, empty cells contributing zeros. Only
// columns with at least one occupied voxel appear.
std::map<GroundIndex, Eigen::VectorXd> flatten_to_ground(const SparseVoxelGrid& grid);

}  // namespace rigidflow
