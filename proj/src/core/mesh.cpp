#include "mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "error.hpp"

namespace pf {

double TriMesh::surface_area() const {
  double area = 0.0;
  for (const auto& t : triangles) {
    area += 0.5 * (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]).norm();
  }
  return area;
}

Aabb TriMesh::bounds() const {
  Aabb box;
  for (const Vec3& v : vertices) box.expand(v);
  return box;
}

std::vector<Vec3> TriMesh::vertex_normals() const {
  std::vector<Vec3> normals(vertices.size(), Vec3::Zero());
  for (const auto& t : triangles) {
    Vec3 n = (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]);
    normals[t[0]] += n;
    normals[t[1]] += n;
    normals[t[2]] += n;
  }
  for (Vec3& n : normals) {
    double len = n.norm();
    if (len > 1e-20) n /= len;
  }
  return normals;
}

void save_ply(const TriMesh& mesh, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  require(f != nullptr, Status::Io, "cannot open for writing: " + path);
  std::fprintf(f,
               "ply\nformat ascii 1.0\nelement vertex %zu\n"
               "property float x\nproperty float y\nproperty float z\n"
               "element face %zu\nproperty list uchar int vertex_indices\nend_header\n",
               mesh.vertices.size(), mesh.triangles.size());
  for (const Vec3& v : mesh.vertices)
    std::fprintf(f, "%.6f %.6f %.6f\n", v.x(), v.y(), v.z());
  for (const auto& t : mesh.triangles) std::fprintf(f, "3 %d %d %d\n", t[0], t[1], t[2]);
  std::fclose(f);
}

void save_obj(const TriMesh& mesh, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  require(f != nullptr, Status::Io, "cannot open for writing: " + path);
  for (const Vec3& v : mesh.vertices)
    std::fprintf(f, "v %.6f %.6f %.6f\n", v.x(), v.y(), v.z());
  for (const auto& t : mesh.triangles)
    std::fprintf(f, "f %d %d %d\n", t[0] + 1, t[1] + 1, t[2] + 1);
  std::fclose(f);
}

TriMesh load_ply(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), Status::Io, "cannot open: " + path);
  std::string line;
  std::getline(in, line);
  require(line.rfind("ply", 0) == 0, Status::Format, "not a PLY file: " + path);
  size_t n_verts = 0, n_faces = 0;
  bool ascii = false;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "format") {
      std::string fmt;
      ss >> fmt;
      ascii = fmt == "ascii";
    } else if (tok == "element") {
      std::string what;
      size_t n;
      ss >> what >> n;
      if (what == "vertex") n_verts = n;
      if (what == "face") n_faces = n;
    } else if (tok == "end_header") {
      break;
    }
  }
  require(ascii, Status::Format, "only ascii PLY supported: " + path);
  TriMesh mesh;
  mesh.vertices.resize(n_verts);
  for (size_t i = 0; i < n_verts; ++i) {
    require(static_cast<bool>(std::getline(in, line)), Status::Format,
            "truncated PLY vertex list: " + path);
    std::istringstream ss(line);
    double x, y, z;
    require(static_cast<bool>(ss >> x >> y >> z), Status::Format, "bad PLY vertex: " + path);
    mesh.vertices[i] = Vec3(x, y, z);
  }
  mesh.triangles.resize(n_faces);
  for (size_t i = 0; i < n_faces; ++i) {
    require(static_cast<bool>(std::getline(in, line)), Status::Format,
            "truncated PLY face list: " + path);
    std::istringstream ss(line);
    int cnt, a, b, c;
    require(static_cast<bool>(ss >> cnt >> a >> b >> c) && cnt == 3, Status::Format,
            "non-triangle PLY face: " + path);
    mesh.triangles[i] = {a, b, c};
  }
  return mesh;
}

std::vector<Vec3> sample_mesh_surface(const TriMesh& mesh, size_t count, uint64_t seed) {
  std::vector<Vec3> out;
  if (mesh.triangles.empty() || count == 0) return out;
  std::vector<double> cum(mesh.triangles.size());
  double total = 0.0;
  for (size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto& t = mesh.triangles[i];
    total += 0.5 *
             (mesh.vertices[t[1]] - mesh.vertices[t[0]])
                 .cross(mesh.vertices[t[2]] - mesh.vertices[t[0]])
                 .norm();
    cum[i] = total;
  }
  if (total <= 0.0) return out;
  Rng rng(seed);
  out.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    double pick = rng.next_double() * total;
    size_t ti = std::lower_bound(cum.begin(), cum.end(), pick) - cum.begin();
    if (ti >= mesh.triangles.size()) ti = mesh.triangles.size() - 1;
    const auto& t = mesh.triangles[ti];
    double r1 = std::sqrt(rng.next_double());
    double r2 = rng.next_double();
    double u = 1.0 - r1, v = r2 * r1;
    out.push_back(mesh.vertices[t[0]] * u + mesh.vertices[t[1]] * v +
                  mesh.vertices[t[2]] * (1.0 - u - v));
  }
  return out;
}

namespace {

struct EdgeKey {
  int a, b;
  bool operator==(const EdgeKey& o) const { return a == o.a && b == o.b; }
};
struct EdgeKeyHash {
  size_t operator()(const EdgeKey& e) const {
    return std::hash<uint64_t>()((static_cast<uint64_t>(e.a) << 32) ^ static_cast<uint32_t>(e.b));
  }
};

std::unordered_map<EdgeKey, int, EdgeKeyHash> edge_use_counts(const TriMesh& mesh) {
  std::unordered_map<EdgeKey, int, EdgeKeyHash> counts;
  counts.reserve(mesh.triangles.size() * 3);
  for (const auto& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      int a = t[e], b = t[(e + 1) % 3];
      counts[{std::min(a, b), std::max(a, b)}]++;
    }
  }
  return counts;
}

}  // namespace

size_t boundary_edge_count(const TriMesh& mesh) {
  size_t n = 0;
  for (const auto& [k, c] : edge_use_counts(mesh))
    if (c == 1) ++n;
  return n;
}

size_t nonmanifold_edge_count(const TriMesh& mesh) {
  size_t n = 0;
  for (const auto& [k, c] : edge_use_counts(mesh))
    if (c > 2) ++n;
  return n;
}

size_t connected_component_count(const TriMesh& mesh) {
  std::vector<int> parent(mesh.vertices.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<char> used(mesh.vertices.size(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& t : mesh.triangles) {
    used[t[0]] = used[t[1]] = used[t[2]] = 1;
    int a = find(t[0]);
    int b = find(t[1]);
    int c = find(t[2]);
    parent[b] = a;
    parent[find(c)] = find(a);
  }
  size_t components = 0;
  for (size_t v = 0; v < mesh.vertices.size(); ++v)
    if (used[v] && find(static_cast<int>(v)) == static_cast<int>(v)) ++components;
  return components;
}

double signed_volume(const TriMesh& mesh) {
  double vol = 0.0;
  for (const auto& t : mesh.triangles) {
    vol += mesh.vertices[t[0]].dot(mesh.vertices[t[1]].cross(mesh.vertices[t[2]])) / 6.0;
  }
  return vol;
}

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Ericson-style closest point on triangle.
  Vec3 ab = b - a, ac = c - a, ap = p - a;
  double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return (p - a).norm();
  Vec3 bp = p - b;
  double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return (p - b).norm();
  double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return (p - (a + (d1 / (d1 - d3)) * ab)).norm();
  Vec3 cp = p - c;
  double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return (p - c).norm();
  double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return (p - (a + (d2 / (d2 - d6)) * ac)).norm();
  double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return (p - (b + w * (c - b))).norm();
  }
  double denom = 1.0 / (va + vb + vc);
  double v = vb * denom, w = vc * denom;
  return (p - (a + ab * v + ac * w)).norm();
}

TriangleDistanceGrid::TriangleDistanceGrid(const TriMesh& mesh, double cell_size) : mesh_(mesh) {
  Aabb box = mesh.bounds();
  if (box.empty()) {
    origin_ = Vec3::Zero();
    cell_ = 1.0;
    nx_ = ny_ = nz_ = 1;
    cells_.resize(1);
    return;
  }
  box.pad(1e-6);
  if (cell_size <= 0.0) {
    double area = mesh.surface_area();
    double per_tri = mesh.triangles.empty() ? 1.0 : area / mesh.triangles.size();
    cell_size = std::max(2.0 * std::sqrt(std::max(per_tri, 1e-12)), 1e-4);
  }
  cell_ = cell_size;
  origin_ = box.lo;
  Vec3 span = box.hi - box.lo;
  nx_ = std::max(1, static_cast<int>(std::ceil(span.x() / cell_)));
  ny_ = std::max(1, static_cast<int>(std::ceil(span.y() / cell_)));
  nz_ = std::max(1, static_cast<int>(std::ceil(span.z() / cell_)));
  cells_.resize(static_cast<size_t>(nx_) * ny_ * nz_);
  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    Aabb tb;
    tb.expand(mesh.vertices[tri[0]]);
    tb.expand(mesh.vertices[tri[1]]);
    tb.expand(mesh.vertices[tri[2]]);
    int x0 = std::clamp(static_cast<int>((tb.lo.x() - origin_.x()) / cell_), 0, nx_ - 1);
    int y0 = std::clamp(static_cast<int>((tb.lo.y() - origin_.y()) / cell_), 0, ny_ - 1);
    int z0 = std::clamp(static_cast<int>((tb.lo.z() - origin_.z()) / cell_), 0, nz_ - 1);
    int x1 = std::clamp(static_cast<int>((tb.hi.x() - origin_.x()) / cell_), 0, nx_ - 1);
    int y1 = std::clamp(static_cast<int>((tb.hi.y() - origin_.y()) / cell_), 0, ny_ - 1);
    int z1 = std::clamp(static_cast<int>((tb.hi.z() - origin_.z()) / cell_), 0, nz_ - 1);
    for (int z = z0; z <= z1; ++z)
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
          cells_[(static_cast<size_t>(z) * ny_ + y) * nx_ + x].tris.push_back(static_cast<int>(t));
  }
}

double TriangleDistanceGrid::tri_distance(int t, const Vec3& p) const {
  const auto& tri = mesh_.triangles[t];
  return point_triangle_distance(p, mesh_.vertices[tri[0]], mesh_.vertices[tri[1]],
                                 mesh_.vertices[tri[2]]);
}

double TriangleDistanceGrid::distance(const Vec3& p) const {
  int px = static_cast<int>(std::floor((p.x() - origin_.x()) / cell_));
  int py = static_cast<int>(std::floor((p.y() - origin_.y()) / cell_));
  int pz = static_cast<int>(std::floor((p.z() - origin_.z()) / cell_));
  double best = std::numeric_limits<double>::max();
  int max_r = std::max({nx_, ny_, nz_}) + std::max({std::abs(px), std::abs(py), std::abs(pz)}) + 2;
  for (int r = 0; r <= max_r; ++r) {
    // Cells at Chebyshev radius r are at least (r-1)*cell away.
    if (best < std::numeric_limits<double>::max() && (r - 1) * cell_ > best) break;
    for (int dz = -r; dz <= r; ++dz) {
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != r) continue;
          int x = px + dx, y = py + dy, z = pz + dz;
          if (x < 0 || y < 0 || z < 0 || x >= nx_ || y >= ny_ || z >= nz_) continue;
          for (int t : cells_[(static_cast<size_t>(z) * ny_ + y) * nx_ + x].tris)
            best = std::min(best, tri_distance(t, p));
        }
      }
    }
  }
  return best;
}

PointGrid::PointGrid(const std::vector<Vec3>& points, double cell_size) : points_(points) {
  Aabb box;
  for (const Vec3& p : points) box.expand(p);
  if (box.empty()) {
    origin_ = Vec3::Zero();
    cell_ = 1.0;
    nx_ = ny_ = nz_ = 1;
    cells_.resize(1);
    return;
  }
  box.pad(1e-6);
  if (cell_size <= 0.0) {
    double vol = std::max((box.hi - box.lo).prod(), 1e-12);
    cell_size = std::max(std::cbrt(vol / std::max<size_t>(points.size(), 1)) * 2.0, 1e-4);
  }
  cell_ = cell_size;
  origin_ = box.lo;
  Vec3 span = box.hi - box.lo;
  nx_ = std::max(1, static_cast<int>(std::ceil(span.x() / cell_)));
  ny_ = std::max(1, static_cast<int>(std::ceil(span.y() / cell_)));
  nz_ = std::max(1, static_cast<int>(std::ceil(span.z() / cell_)));
  cells_.resize(static_cast<size_t>(nx_) * ny_ * nz_);
  for (size_t i = 0; i < points.size(); ++i) {
    int x = std::clamp(static_cast<int>((points[i].x() - origin_.x()) / cell_), 0, nx_ - 1);
    int y = std::clamp(static_cast<int>((points[i].y() - origin_.y()) / cell_), 0, ny_ - 1);
    int z = std::clamp(static_cast<int>((points[i].z() - origin_.z()) / cell_), 0, nz_ - 1);
    cells_[(static_cast<size_t>(z) * ny_ + y) * nx_ + x].push_back(static_cast<int>(i));
  }
}

int PointGrid::nearest(const Vec3& p) const {
  int px = static_cast<int>(std::floor((p.x() - origin_.x()) / cell_));
  int py = static_cast<int>(std::floor((p.y() - origin_.y()) / cell_));
  int pz = static_cast<int>(std::floor((p.z() - origin_.z()) / cell_));
  double best = std::numeric_limits<double>::max();
  int best_i = -1;
  int max_r = std::max({nx_, ny_, nz_}) + std::max({std::abs(px), std::abs(py), std::abs(pz)}) + 2;
  for (int r = 0; r <= max_r; ++r) {
    if (best_i >= 0 && (r - 1) * cell_ > best) break;
    for (int dz = -r; dz <= r; ++dz) {
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != r) continue;
          int x = px + dx, y = py + dy, z = pz + dz;
          if (x < 0 || y < 0 || z < 0 || x >= nx_ || y >= ny_ || z >= nz_) continue;
          for (int i : cells_[(static_cast<size_t>(z) * ny_ + y) * nx_ + x]) {
            double d = (points_[i] - p).norm();
            if (d < best || (d == best && i < best_i)) {
              best = d;
              best_i = i;
            }
          }
        }
      }
    }
  }
  return best_i;
}

void PointGrid::knearest(const Vec3& p, int k, std::vector<int>& out) const {
  out.clear();
  // Bounded insertion set; k stays tiny (4 for warp bindings).
  constexpr int kMax = 16;
  if (k > kMax) k = kMax;
  double best_d[kMax];
  int best_i[kMax];
  int found = 0;
  auto insert = [&](double d, int i) {
    if (found == k && d >= best_d[k - 1]) return;
    int pos = found < k ? found : k - 1;
    while (pos > 0 && best_d[pos - 1] > d) {
      best_d[pos] = best_d[pos - 1];
      best_i[pos] = best_i[pos - 1];
      --pos;
    }
    best_d[pos] = d;
    best_i[pos] = i;
    if (found < k) ++found;
  };

  int px = static_cast<int>(std::floor((p.x() - origin_.x()) / cell_));
  int py = static_cast<int>(std::floor((p.y() - origin_.y()) / cell_));
  int pz = static_cast<int>(std::floor((p.z() - origin_.z()) / cell_));
  auto scan_cell = [&](int x, int y, int z) {
    if (x < 0 || y < 0 || z < 0 || x >= nx_ || y >= ny_ || z >= nz_) return;
    for (int i : cells_[(static_cast<size_t>(z) * ny_ + y) * nx_ + x])
      insert((points_[i] - p).norm(), i);
  };
  int max_r = std::max({nx_, ny_, nz_}) + std::max({std::abs(px), std::abs(py), std::abs(pz)}) + 2;
  for (int r = 0; r <= max_r; ++r) {
    if (found == k && (r - 1) * cell_ > best_d[k - 1]) break;
    for (int dz = -r; dz <= r; ++dz) {
      for (int dy = -r; dy <= r; ++dy) {
        if (std::abs(dz) == r || std::abs(dy) == r) {
          for (int dx = -r; dx <= r; ++dx) scan_cell(px + dx, py + dy, pz + dz);
        } else {
          scan_cell(px - r, py + dy, pz + dz);
          scan_cell(px + r, py + dy, pz + dz);
        }
      }
    }
  }
  for (int i = 0; i < found; ++i) out.push_back(best_i[i]);
}

double PointGrid::nearest_distance(const Vec3& p) const {
  int i = nearest(p);
  return i < 0 ? std::numeric_limits<double>::max() : (points_[i] - p).norm();
}

DistanceStats stats_of(const std::vector<double>& dists) {
  DistanceStats s;
  s.count = dists.size();
  if (dists.empty()) return s;
  double sum = 0.0, sq = 0.0;
  for (double d : dists) {
    sum += d;
    sq += d * d;
    s.max = std::max(s.max, d);
  }
  s.mean = sum / dists.size();
  s.rms = std::sqrt(sq / dists.size());
  return s;
}

DistanceStats mesh_distance(const TriMesh& a, const TriMesh& b, size_t samples_per_side,
                            uint64_t seed) {
  require(!a.empty() && !b.empty(), Status::InvalidArgument,
          "mesh_distance requires non-empty meshes");
  TriangleDistanceGrid grid_a(a), grid_b(b);
  std::vector<double> dists;
  dists.reserve(samples_per_side * 2);
  for (const Vec3& p : sample_mesh_surface(a, samples_per_side, seed)) {
    dists.push_back(grid_b.distance(p));
  }
  for (const Vec3& p : sample_mesh_surface(b, samples_per_side, seed + 1)) {
    dists.push_back(grid_a.distance(p));
  }
  return stats_of(dists);
}

DistanceStats mesh_to_points_distance(const TriMesh& mesh, const std::vector<Vec3>& cloud,
                                      size_t mesh_samples, uint64_t seed) {
  require(!mesh.empty() && !cloud.empty(), Status::InvalidArgument,
          "mesh_to_points_distance requires non-empty inputs");
  TriangleDistanceGrid grid(mesh);
  PointGrid pgrid(cloud);
  std::vector<double> dists;
  dists.reserve(cloud.size() + mesh_samples);
  for (const Vec3& p : cloud) dists.push_back(grid.distance(p));
  for (const Vec3& p : sample_mesh_surface(mesh, mesh_samples, seed))
    dists.push_back(pgrid.nearest_distance(p));
  return stats_of(dists);
}

}  // namespace pf
