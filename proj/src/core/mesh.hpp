#pragma once

#include <array>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "rng.hpp"

namespace pf {

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;

  bool empty() const { return triangles.empty(); }
  double surface_area() const;
  Aabb bounds() const;
  // Area-weighted per-vertex normals.
  std::vector<Vec3> vertex_normals() const;
};

void save_ply(const TriMesh& mesh, const std::string& path);
void save_obj(const TriMesh& mesh, const std::string& path);
TriMesh load_ply(const std::string& path);

// Area-uniform surface samples; deterministic for a fixed seed.
std::vector<Vec3> sample_mesh_surface(const TriMesh& mesh, size_t count, uint64_t seed);

// Edges referenced by exactly one triangle; 0 for a watertight mesh.
size_t boundary_edge_count(const TriMesh& mesh);
// Edges referenced by more than two triangles (non-manifold).
size_t nonmanifold_edge_count(const TriMesh& mesh);
size_t connected_component_count(const TriMesh& mesh);
// Signed volume via the divergence theorem; positive for outward winding.
double signed_volume(const TriMesh& mesh);

// Uniform-grid accelerator for exact point-to-surface distance queries.
class TriangleDistanceGrid {
 public:
  explicit TriangleDistanceGrid(const TriMesh& mesh, double cell_size = 0.0);
  double distance(const Vec3& p) const;

 private:
  struct Cell {
    std::vector<int> tris;
  };
  double tri_distance(int t, const Vec3& p) const;

  const TriMesh& mesh_;
  Vec3 origin_;
  double cell_ = 0.0;
  int nx_ = 0, ny_ = 0, nz_ = 0;
  std::vector<Cell> cells_;
};

// Uniform-grid nearest-neighbor index over a fixed point set.
class PointGrid {
 public:
  explicit PointGrid(const std::vector<Vec3>& points, double cell_size = 0.0);
  // Index of the nearest point (smallest index wins ties).
  int nearest(const Vec3& p) const;
  // Indices of the k nearest points, closest first.
  void knearest(const Vec3& p, int k, std::vector<int>& out) const;
  double nearest_distance(const Vec3& p) const;

 private:
  const std::vector<Vec3>& points_;
  Vec3 origin_;
  double cell_ = 0.0;
  int nx_ = 0, ny_ = 0, nz_ = 0;
  std::vector<std::vector<int>> cells_;
};

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

struct DistanceStats {
  double mean = 0.0;
  double max = 0.0;
  double rms = 0.0;
  size_t count = 0;
};

// Symmetric sampled surface-to-surface distance (point-to-triangle exact on
// the opposite mesh).
DistanceStats mesh_distance(const TriMesh& a, const TriMesh& b, size_t samples_per_side = 20000,
                            uint64_t seed = 20240601ull);

// Mesh vs point cloud: cloud points measured against the mesh surface, mesh
// samples against their nearest cloud point.
DistanceStats mesh_to_points_distance(const TriMesh& mesh, const std::vector<Vec3>& cloud,
                                      size_t mesh_samples = 20000, uint64_t seed = 20240601ull);

DistanceStats stats_of(const std::vector<double>& dists);

}  // namespace pf
