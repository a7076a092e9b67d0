#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "capsule.hpp"
#include "geometry.hpp"
#include "marching_cubes.hpp"
#include "occupancy.hpp"

namespace pf {

enum class VoxelState : uint8_t {
  Exterior = 0,  // outside the valid band
  Valid = 1,     // inside the band; fused
  Interior = 2,  // deeper inside the body than the band
};

// Regular accumulation grid; voxel (i,j,k) is centered at
// origin + voxel_size*(i,j,k) so the lattice doubles as the extraction grid.
struct VoxelVolume {
  Vec3 origin = Vec3::Zero();
  double voxel_size = 0.01;
  Eigen::Vector3i dims = Eigen::Vector3i::Zero();

  std::vector<double> weighted_sum;   // sum of w*phi
  std::vector<double> weight_sum;     // sum of w
  std::vector<double> phi_sum;        // unweighted sum (fallback mean)
  std::vector<uint32_t> phi_count;
  std::vector<uint8_t> state;         // VoxelState
  std::vector<double> occupancy;      // finalized field

  size_t voxel_count() const {
    return static_cast<size_t>(dims.x()) * dims.y() * dims.z();
  }
  size_t index(int i, int j, int k) const {
    return (static_cast<size_t>(k) * dims.y() + j) * dims.x() + i;
  }
  Vec3 center(int i, int j, int k) const { return origin + voxel_size * Vec3(i, j, k); }
  Aabb bounds() const {
    Aabb box;
    box.expand(origin);
    box.expand(origin + voxel_size * Vec3(dims.x() - 1, dims.y() - 1, dims.z() - 1));
    return box;
  }

  void validate() const;
};

// Volume whose lattice covers `bounds` (voxel centers on both sides).
VoxelVolume allocate_volume(const Aabb& bounds, double voxel_size);

// Marks voxels whose unsigned distance to the posed body surface is within
// `band` as Valid, deeper voxels as Interior. Errors if the body plus band is
// not contained in the volume. Returns the valid-voxel count.
size_t select_valid_voxels(VoxelVolume& volume, const std::vector<Capsule>& posed_body,
                           double band);

// Finalizes per-voxel occupancy: weighted mean where the accumulated weight
// clears the floor, otherwise the plain mean of queried values; Interior
// voxels read 1, Exterior 0.
void finalize_volume(VoxelVolume& volume, double weight_floor);

OccupancyGrid volume_to_grid(const VoxelVolume& volume);
void save_volume(const VoxelVolume& volume, const std::string& path);
// Accumulated blend weights as a PFVO grid (intermediate dump).
OccupancyGrid volume_weights_grid(const VoxelVolume& volume);

ScalarGrid extraction_grid(const VoxelVolume& volume, double iso_level);

}  // namespace pf
