#include "marching_cubes.hpp"

#include <cmath>
#include <unordered_map>

namespace pf {

namespace {

// Classic Lorensen/Cline tables (Bourke layout). Corner i of a cell is at
// cell + corner_shift[i]; edge e runs corner edge_to_vert[e][0] ->
// edge_to_vert[e][1] and is keyed by (base node, axis) in edge_shift.
const int corner_shift[8][3] = {
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
    {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
};

const int edge_shift[12][4] = {
    {0, 0, 0, 0}, {1, 0, 0, 1}, {0, 1, 0, 0}, {0, 0, 0, 1},
    {0, 0, 1, 0}, {1, 0, 1, 1}, {0, 1, 1, 0}, {0, 0, 1, 1},
    {0, 0, 0, 2}, {1, 0, 0, 2}, {1, 1, 0, 2}, {0, 1, 0, 2},
};

const int edge_to_vert[12][2] = {
    {0, 1}, {1, 2}, {3, 2}, {0, 3}, {4, 5}, {5, 6},
    {7, 6}, {4, 7}, {0, 4}, {1, 5}, {2, 6}, {3, 7},
};

#include "mc_tables.inc"

}  // namespace

TriMesh marching_cubes(const ScalarGrid& grid, double iso) {
  TriMesh mesh;
  const int nx = grid.dims.x(), ny = grid.dims.y(), nz = grid.dims.z();
  if (nx < 2 || ny < 2 || nz < 2) return mesh;

  // Edge key: (node index)*3 + axis.
  std::unordered_map<int64_t, int> edge_vertex;
  auto node_index = [&](int i, int j, int k) {
    return (static_cast<int64_t>(k) * ny + j) * nx + i;
  };

  const double eps = 1e-12;
  double f[8];
  int cell_edge_vertex[12];

  for (int z = 0; z + 1 < nz; ++z) {
    for (int y = 0; y + 1 < ny; ++y) {
      for (int x = 0; x + 1 < nx; ++x) {
        int cube_index = 0;
        for (int i = 0; i < 8; ++i) {
          double v =
              grid.at(x + corner_shift[i][0], y + corner_shift[i][1], z + corner_shift[i][2]);
          // Nudge exact-iso corners off the surface to avoid degenerate output.
          if (std::abs(v - iso) < eps) v = iso + eps;
          f[i] = v;
          if (v < iso) cube_index |= 1 << i;
        }
        if (edge_table[cube_index] == 0) continue;

        for (int e = 0; e < 12; ++e) {
          if (!(edge_table[cube_index] & (1 << e))) continue;
          int bi = x + edge_shift[e][0], bj = y + edge_shift[e][1], bk = z + edge_shift[e][2];
          int axis = edge_shift[e][3];
          int64_t key = node_index(bi, bj, bk) * 3 + axis;
          auto it = edge_vertex.find(key);
          if (it != edge_vertex.end()) {
            cell_edge_vertex[e] = it->second;
            continue;
          }
          double v0 = f[edge_to_vert[e][0]];
          double v1 = f[edge_to_vert[e][1]];
          double t = (iso - v0) / (v1 - v0);
          t = std::clamp(t, 0.0, 1.0);
          Vec3 p = grid.position(bi, bj, bk);
          p[axis] += t * grid.spacing;
          cell_edge_vertex[e] = static_cast<int>(mesh.vertices.size());
          edge_vertex.emplace(key, cell_edge_vertex[e]);
          mesh.vertices.push_back(p);
        }

        for (int i = 0; tri_table[cube_index][i] != -1; i += 3) {
          int a = cell_edge_vertex[tri_table[cube_index][i]];
          int b = cell_edge_vertex[tri_table[cube_index][i + 2]];
          int c = cell_edge_vertex[tri_table[cube_index][i + 1]];
          if (a == b || b == c || a == c) continue;
          mesh.triangles.push_back({a, b, c});
        }
      }
    }
  }
  return mesh;
}

}  // namespace pf
