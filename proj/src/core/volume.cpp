#include "volume.hpp"

#include <cmath>

#include "error.hpp"

namespace pf {

void VoxelVolume::validate() const {
  require(dims.x() >= 2 && dims.y() >= 2 && dims.z() >= 2, Status::InvalidArgument,
          "volume needs at least 2 voxels per axis");
  require(voxel_size > 0.0, Status::InvalidArgument, "voxel size must be positive");
  for (double w : weight_sum)
    require(w >= 0.0, Status::InvalidArgument, "negative accumulated weight");
}

VoxelVolume allocate_volume(const Aabb& bounds, double voxel_size) {
  require(voxel_size > 0.0, Status::InvalidArgument, "voxel size must be positive");
  require(!bounds.empty(), Status::InvalidArgument, "empty volume bounds");
  VoxelVolume vol;
  vol.voxel_size = voxel_size;
  vol.origin = bounds.lo;
  Vec3 span = bounds.hi - bounds.lo;
  vol.dims = Eigen::Vector3i(static_cast<int>(std::ceil(span.x() / voxel_size)) + 1,
                             static_cast<int>(std::ceil(span.y() / voxel_size)) + 1,
                             static_cast<int>(std::ceil(span.z() / voxel_size)) + 1);
  vol.dims = vol.dims.cwiseMax(Eigen::Vector3i(2, 2, 2));
  size_t n = vol.voxel_count();
  vol.weighted_sum.assign(n, 0.0);
  vol.weight_sum.assign(n, 0.0);
  vol.phi_sum.assign(n, 0.0);
  vol.phi_count.assign(n, 0u);
  vol.state.assign(n, static_cast<uint8_t>(VoxelState::Exterior));
  vol.occupancy.assign(n, 0.0);
  return vol;
}

size_t select_valid_voxels(VoxelVolume& volume, const std::vector<Capsule>& posed_body,
                           double band) {
  require(band > 0.0, Status::InvalidArgument, "band must be positive");
  Aabb body = capsule_union_bounds(posed_body);
  body.pad(band);
  require(volume.bounds().contains(body), Status::Bounds,
          "volume does not contain the posed body plus band");
  size_t valid = 0;
  for (int k = 0; k < volume.dims.z(); ++k) {
    for (int j = 0; j < volume.dims.y(); ++j) {
      for (int i = 0; i < volume.dims.x(); ++i) {
        double sdf = capsule_union_sdf(posed_body, volume.center(i, j, k));
        VoxelState s = VoxelState::Exterior;
        if (std::abs(sdf) <= band) {
          s = VoxelState::Valid;
          ++valid;
        } else if (sdf < 0.0) {
          s = VoxelState::Interior;
        }
        volume.state[volume.index(i, j, k)] = static_cast<uint8_t>(s);
      }
    }
  }
  return valid;
}

void finalize_volume(VoxelVolume& volume, double weight_floor) {
  for (size_t v = 0; v < volume.voxel_count(); ++v) {
    switch (static_cast<VoxelState>(volume.state[v])) {
      case VoxelState::Exterior:
        volume.occupancy[v] = 0.0;
        break;
      case VoxelState::Interior:
        volume.occupancy[v] = 1.0;
        break;
      case VoxelState::Valid:
        if (volume.weight_sum[v] >= weight_floor) {
          volume.occupancy[v] = volume.weighted_sum[v] / volume.weight_sum[v];
        } else if (volume.phi_count[v] > 0) {
          volume.occupancy[v] = volume.phi_sum[v] / volume.phi_count[v];
        } else {
          volume.occupancy[v] = 0.0;  // never observed by any keyframe
        }
        break;
    }
  }
}

OccupancyGrid volume_to_grid(const VoxelVolume& volume) {
  OccupancyGrid grid;
  grid.dims = volume.dims;
  grid.origin = volume.origin;
  grid.voxel_size = volume.voxel_size;
  grid.values.resize(volume.voxel_count());
  for (size_t i = 0; i < grid.values.size(); ++i)
    grid.values[i] = static_cast<float>(volume.occupancy[i]);
  return grid;
}

void save_volume(const VoxelVolume& volume, const std::string& path) {
  save_pfvo(volume_to_grid(volume), path);
}

OccupancyGrid volume_weights_grid(const VoxelVolume& volume) {
  OccupancyGrid grid;
  grid.dims = volume.dims;
  grid.origin = volume.origin;
  grid.voxel_size = volume.voxel_size;
  grid.values.resize(volume.voxel_count());
  for (size_t i = 0; i < grid.values.size(); ++i)
    grid.values[i] = static_cast<float>(volume.weight_sum[i]);
  return grid;
}

ScalarGrid extraction_grid(const VoxelVolume& volume, double iso_level) {
  ScalarGrid grid;
  grid.dims = volume.dims;
  grid.origin = volume.origin;
  grid.spacing = volume.voxel_size;
  grid.values.resize(volume.voxel_count());
  for (size_t i = 0; i < grid.values.size(); ++i)
    grid.values[i] = iso_level - volume.occupancy[i];
  return grid;
}

}  // namespace pf
