#pragma once

#include <vector>

#include "geometry.hpp"
#include "mesh.hpp"

namespace pf {

// Scalar samples at grid nodes; node (i,j,k) sits at origin + spacing*(i,j,k).
struct ScalarGrid {
  Eigen::Vector3i dims = Eigen::Vector3i::Zero();  // node counts
  Vec3 origin = Vec3::Zero();
  double spacing = 0.0;
  std::vector<double> values;  // x-fastest

  size_t index(int i, int j, int k) const {
    return (static_cast<size_t>(k) * dims.y() + j) * dims.x() + i;
  }
  double at(int i, int j, int k) const { return values[index(i, j, k)]; }
  double& at(int i, int j, int k) { return values[index(i, j, k)]; }
  Vec3 position(int i, int j, int k) const { return origin + spacing * Vec3(i, j, k); }
};

// Isosurface triangulation with linear edge interpolation and shared edge
// vertices. Values below iso are interior; triangles are wound so normals
// point outward (toward larger values).
TriMesh marching_cubes(const ScalarGrid& grid, double iso);

}  // namespace pf
