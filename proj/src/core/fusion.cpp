#include "fusion.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "edt.hpp"
#include "error.hpp"
#include "log.hpp"

namespace pf {

void FusionConfig::validate() const {
  require(voxel_size > 0.0, Status::InvalidArgument, "voxel size must be positive");
  require(band > 0.0, Status::InvalidArgument, "band must be positive");
  require(blend_sigma > 0.0, Status::InvalidArgument, "blend sigma must be positive");
  require(blend_tau >= 0.0, Status::InvalidArgument, "blend tau must be non-negative");
  require(weight_floor >= 0.0, Status::InvalidArgument, "weight floor must be non-negative");
}

void CollisionConfig::validate() const {
  require(tau1 < tau2, Status::InvalidArgument, "collision thresholds require tau1 < tau2");
  require(resolve_proportion > 0.0 && resolve_proportion <= 1.0, Status::InvalidArgument,
          "resolve proportion must lie in (0,1]");
  require(search_radius >= 0, Status::InvalidArgument, "search radius must be non-negative");
}

double blend_weight(std::optional<double> psdf_value, const FusionConfig& cfg) {
  if (!psdf_value) return 0.0;
  double p = *psdf_value;
  if (p < cfg.blend_tau) return 1.0;
  return std::exp(-cfg.blend_sigma * (p - cfg.blend_tau));
}

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

FuseResult fuse_frame(const Body& body, FrameSource& frames, const std::vector<int>& keyframes,
                      int frame, const OccupancyProvider& provider, const FusionConfig& cfg,
                      std::vector<std::pair<int, OccupancyGrid>>* per_keyframe_weights) {
  cfg.validate();
  require(!keyframes.empty(), Status::InvalidArgument, "empty keyframe set");
  require(frame >= 0 && frame < frames.frame_count(), Status::InvalidArgument,
          "frame index out of range");
  for (int k : keyframes)
    require(k >= 0 && k < frames.frame_count(), Status::InvalidArgument,
            "keyframe index out of range");

  FuseResult result;
  result.keyframes = keyframes;
  std::sort(result.keyframes.begin(), result.keyframes.end());
  result.keyframes.erase(std::unique(result.keyframes.begin(), result.keyframes.end()),
                         result.keyframes.end());

  const Pose& current_pose = frames.pose(frame);
  std::vector<Capsule> posed = posed_capsules(body.skeleton, current_pose);
  Aabb bounds = capsule_union_bounds(posed);
  bounds.pad(cfg.band + 2.0 * cfg.voxel_size);
  result.volume = allocate_volume(bounds, cfg.voxel_size);
  result.valid_voxels = select_valid_voxels(result.volume, posed, cfg.band);

  VoxelVolume& vol = result.volume;
  std::vector<Vec3> centers;
  std::vector<size_t> voxel_of;
  centers.reserve(result.valid_voxels);
  voxel_of.reserve(result.valid_voxels);
  for (int k = 0; k < vol.dims.z(); ++k)
    for (int j = 0; j < vol.dims.y(); ++j)
      for (int i = 0; i < vol.dims.x(); ++i) {
        size_t v = vol.index(i, j, k);
        if (vol.state[v] == static_cast<uint8_t>(VoxelState::Valid)) {
          centers.push_back(vol.center(i, j, k));
          voxel_of.push_back(v);
        }
      }

  std::vector<Vec3> query_points;
  std::vector<size_t> query_voxel;
  std::vector<double> phi;
  for (int k : result.keyframes) {
    auto t0 = std::chrono::steady_clock::now();
    query_points.clear();
    query_voxel.clear();
    if (k == frame) {
      query_points = centers;
      query_voxel = voxel_of;
    } else {
      PointWarp warp(body, current_pose, frames.pose(k), cfg.band);
      for (size_t i = 0; i < centers.size(); ++i) {
        WarpedPoint wp = warp.warp(centers[i]);
        if (!wp.ok) continue;  // outside the band: skipped for this keyframe
        query_points.push_back(wp.position);
        query_voxel.push_back(voxel_of[i]);
      }
    }
    result.timings.deform_ms += ms_since(t0);

    t0 = std::chrono::steady_clock::now();
    const Pose& key_pose = frames.pose(k);
    const Camera& key_camera = frames.camera(k);
    const DepthImage* key_depth = frames.depth(k);
    FrameContext ctx{k, &key_pose, &key_camera, key_depth};
    phi.assign(query_points.size(), 0.0);
    try {
      provider.query(std::span<const Vec3>(query_points), ctx, std::span<double>(phi));
    } catch (const Error& e) {
      fail(Status::Runtime, "occupancy provider '%s' failed on keyframe %d: %s",
           provider.name().c_str(), k + 1, e.what());
    }
    result.timings.query_ms += ms_since(t0);

    t0 = std::chrono::steady_clock::now();
    OccupancyGrid* dump = nullptr;
    if (per_keyframe_weights) {
      per_keyframe_weights->emplace_back(k, OccupancyGrid{});
      dump = &per_keyframe_weights->back().second;
      dump->dims = vol.dims;
      dump->origin = vol.origin;
      dump->voxel_size = vol.voxel_size;
      dump->values.assign(vol.voxel_count(), 0.0f);
    }
    for (size_t i = 0; i < query_points.size(); ++i) {
      std::optional<double> p;
      if (key_depth) p = psdf(query_points[i], key_camera, *key_depth, cfg.bilinear_depth);
      double w = blend_weight(p, cfg);
      size_t v = query_voxel[i];
      vol.weighted_sum[v] += w * phi[i];
      vol.weight_sum[v] += w;
      vol.phi_sum[v] += phi[i];
      vol.phi_count[v] += 1;
      if (dump) dump->values[v] = static_cast<float>(w);
    }
    result.timings.blend_ms += ms_since(t0);
  }

  finalize_volume(vol, cfg.weight_floor);
  return result;
}

CollisionSet detect_collisions(const std::vector<Vec3>& posed_current,
                               const std::vector<Vec3>& posed_keyframe,
                               const std::vector<Vec3>& rest, const CollisionConfig& cfg) {
  cfg.validate();
  const size_t n = rest.size();
  require(posed_current.size() == n && posed_keyframe.size() == n, Status::InvalidArgument,
          "collision detection needs equally sized vertex arrays");

  const double tau1_sq = cfg.tau1 * cfg.tau1;
  const double tau2_sq = cfg.tau2 * cfg.tau2;
  CollisionSet out;
  std::vector<char> flagged(n, 0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      if ((posed_current[i] - posed_current[j]).squaredNorm() >= tau1_sq) continue;
      if ((posed_keyframe[i] - posed_keyframe[j]).squaredNorm() <= tau2_sq) continue;
      if ((rest[i] - rest[j]).squaredNorm() < tau2_sq) continue;  // naturally close
      out.pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
      flagged[i] = flagged[j] = 1;
    }
  }
  for (size_t i = 0; i < n; ++i)
    if (flagged[i]) out.vertices.push_back(static_cast<int>(i));
  return out;
}

CollisionResolution find_no_collision_frame(const Body& body, FrameSource& frames, int frame,
                                            const CollisionSet& collisions,
                                            const CollisionConfig& cfg) {
  require(!collisions.empty(), Status::InvalidArgument,
          "no-collision search needs a non-empty collided set");
  // Partners each collided vertex must separate from.
  std::unordered_map<int, std::vector<int>> partners;
  for (const auto& [i, j] : collisions.pairs) {
    partners[i].push_back(j);
    partners[j].push_back(i);
  }

  const double tau2_sq = cfg.tau2 * cfg.tau2;
  CollisionResolution res;
  for (int r = 1; r <= cfg.search_radius; ++r) {
    for (int candidate : {frame - r, frame + r}) {  // earlier frame wins ties
      if (candidate < 0 || candidate >= frames.frame_count()) continue;
      std::vector<Vec3> posed = skin_pose(body, frames.pose(candidate));
      size_t stuck = 0;
      for (int v : collisions.vertices) {
        bool separated = false;
        for (int partner : partners[v]) {
          if ((posed[v] - posed[partner]).squaredNorm() > tau2_sq) {
            separated = true;
            break;
          }
        }
        if (!separated) ++stuck;
      }
      double proportion = static_cast<double>(stuck) / collisions.vertices.size();
      if (proportion < cfg.resolve_proportion) {
        res.found = true;
        res.frame = candidate;
        return res;
      }
    }
  }
  PF_LOG_WARN("no collision-free frame within %d frames of frame %d; fusing without handling",
              cfg.search_radius, frame + 1);
  return res;
}

std::vector<uint8_t> voxelize_mesh(const TriMesh& mesh, const Vec3& origin, double voxel_size,
                                   const Eigen::Vector3i& dims) {
  const int nx = dims.x(), ny = dims.y(), nz = dims.z();
  std::vector<uint8_t> occ(static_cast<size_t>(nx) * ny * nz, 0);
  if (mesh.empty()) return occ;

  // Offset rows slightly off the lattice so rays never graze edges exactly.
  const double jitter_y = 0.1234567e-3 * voxel_size;
  const double jitter_z = 0.2345671e-3 * voxel_size;

  // Bucket triangle crossings per (j, k) row.
  std::vector<std::vector<double>> crossings(static_cast<size_t>(ny) * nz);
  for (const auto& tri : mesh.triangles) {
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3& b = mesh.vertices[tri[1]];
    const Vec3& c = mesh.vertices[tri[2]];
    double ymin = std::min({a.y(), b.y(), c.y()}), ymax = std::max({a.y(), b.y(), c.y()});
    double zmin = std::min({a.z(), b.z(), c.z()}), zmax = std::max({a.z(), b.z(), c.z()});
    int j0 = std::max(0, static_cast<int>(std::ceil((ymin - origin.y() - jitter_y) / voxel_size)));
    int j1 = std::min(ny - 1,
                      static_cast<int>(std::floor((ymax - origin.y() - jitter_y) / voxel_size)));
    int k0 = std::max(0, static_cast<int>(std::ceil((zmin - origin.z() - jitter_z) / voxel_size)));
    int k1 = std::min(nz - 1,
                      static_cast<int>(std::floor((zmax - origin.z() - jitter_z) / voxel_size)));
    for (int k = k0; k <= k1; ++k) {
      double rz = origin.z() + k * voxel_size + jitter_z;
      for (int j = j0; j <= j1; ++j) {
        double ry = origin.y() + j * voxel_size + jitter_y;
        // 2D point-in-triangle in the yz plane via signed areas.
        double d0 = (b.y() - a.y()) * (rz - a.z()) - (b.z() - a.z()) * (ry - a.y());
        double d1 = (c.y() - b.y()) * (rz - b.z()) - (c.z() - b.z()) * (ry - b.y());
        double d2 = (a.y() - c.y()) * (rz - c.z()) - (a.z() - c.z()) * (ry - c.y());
        bool neg = d0 < 0 || d1 < 0 || d2 < 0;
        bool pos = d0 > 0 || d1 > 0 || d2 > 0;
        if (neg && pos) continue;
        double denom = d0 + d1 + d2;
        if (std::abs(denom) < 1e-30) continue;  // degenerate in projection
        double w0 = d1 / denom, w1 = d2 / denom, w2 = d0 / denom;
        double x = w0 * a.x() + w1 * b.x() + w2 * c.x();
        crossings[static_cast<size_t>(k) * ny + j].push_back(x);
      }
    }
  }

  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      auto& xs = crossings[static_cast<size_t>(k) * ny + j];
      if (xs.empty()) continue;
      std::sort(xs.begin(), xs.end());
      size_t row = (static_cast<size_t>(k) * ny + j) * nx;
      size_t c = 0;
      for (int i = 0; i < nx; ++i) {
        double x = origin.x() + i * voxel_size;
        while (c < xs.size() && xs[c] < x) ++c;
        if (c & 1) occ[row + i] = 1;
      }
    }
  }
  return occ;
}

void apply_collision_fusion(VoxelVolume& volume, const TriMesh& deformed_model,
                            const std::vector<Vec3>& posed_vertices,
                            const std::vector<int>& collided_vertices,
                            const CollisionConfig& cfg, CollisionFusionInfo* info) {
  cfg.validate();
  const size_t n = volume.voxel_count();
  std::vector<uint8_t> mask(n, 0);
  size_t mask_count = 0;
  if (!collided_vertices.empty() && !posed_vertices.empty()) {
    std::unordered_set<int> collided(collided_vertices.begin(), collided_vertices.end());
    PointGrid grid(posed_vertices);
    for (int k = 0; k < volume.dims.z(); ++k)
      for (int j = 0; j < volume.dims.y(); ++j)
        for (int i = 0; i < volume.dims.x(); ++i) {
          size_t v = volume.index(i, j, k);
          if (volume.state[v] != static_cast<uint8_t>(VoxelState::Valid)) continue;
          if (collided.count(grid.nearest(volume.center(i, j, k)))) {
            mask[v] = 1;
            ++mask_count;
          }
        }
  }
  if (info) {
    info->mask = mask;
    info->mask_count = mask_count;
    info->alpha.assign(n, 0.0);
  }
  if (mask_count == 0 || cfg.mask_distance <= 0.0) return;  // nothing to blend

  std::vector<double> sq = squared_distance_transform(mask, volume.dims);
  std::vector<uint8_t> model = voxelize_mesh(deformed_model, volume.origin, volume.voxel_size,
                                             volume.dims);
  for (size_t v = 0; v < n; ++v) {
    double dist = std::sqrt(sq[v]) * volume.voxel_size;
    double alpha = std::clamp(1.0 - dist / cfg.mask_distance, 0.0, 1.0);
    if (info) info->alpha[v] = alpha;
    if (alpha <= 0.0) continue;  // untouched beyond mask_distance
    volume.occupancy[v] = alpha * model[v] + (1.0 - alpha) * volume.occupancy[v];
  }
}

TriMesh extract_mesh(const VoxelVolume& volume, double iso_level) {
  return marching_cubes(extraction_grid(volume, iso_level), 0.0);
}

}  // namespace pf
