#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace pf {

// Exact squared Euclidean distance transform (Felzenszwalb-Huttenlocher),
// in voxel units, from the set bits of `mask` over an x-fastest grid.
std::vector<double> squared_distance_transform(const std::vector<uint8_t>& mask,
                                               const Eigen::Vector3i& dims);

}  // namespace pf
