#include "body.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "marching_cubes.hpp"
#include "parallel.hpp"

namespace pf {

void ProxyMesh::validate(const Skeleton& s) const {
  require(weights.size() == mesh.vertices.size(), Status::InvalidArgument,
          "proxy weight count does not match vertex count");
  for (const auto& w : weights) {
    require(!w.empty(), Status::InvalidArgument, "proxy vertex has no skinning weights");
    double sum = 0.0;
    for (const auto& [j, wj] : w) {
      require(j >= 0 && j < static_cast<int>(s.joint_count()), Status::InvalidArgument,
              "skinning weight joint index out of range");
      require(wj >= 0.0, Status::InvalidArgument, "negative skinning weight");
      sum += wj;
    }
    require(std::abs(sum - 1.0) < 1e-6, Status::InvalidArgument,
            "skinning weights must sum to 1");
  }
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k)
      require(t[k] >= 0 && t[k] < static_cast<int>(mesh.vertices.size()),
              Status::InvalidArgument, "triangle index out of range");
  }
}

ProxyMesh tessellate_proxy(const Skeleton& s, const TessellationOptions& opts) {
  s.validate();
  std::vector<Capsule> caps = s.rest_capsules();
  Aabb box = capsule_union_bounds(caps);
  box.pad(2.0 * opts.voxel_size);

  ScalarGrid grid;
  grid.spacing = opts.voxel_size;
  grid.origin = box.lo;
  Vec3 span = box.hi - box.lo;
  grid.dims = Eigen::Vector3i(static_cast<int>(std::ceil(span.x() / grid.spacing)) + 1,
                              static_cast<int>(std::ceil(span.y() / grid.spacing)) + 1,
                              static_cast<int>(std::ceil(span.z() / grid.spacing)) + 1);
  grid.values.resize(static_cast<size_t>(grid.dims.x()) * grid.dims.y() * grid.dims.z());
  for (int k = 0; k < grid.dims.z(); ++k)
    for (int j = 0; j < grid.dims.y(); ++j)
      for (int i = 0; i < grid.dims.x(); ++i)
        grid.at(i, j, k) = capsule_union_sdf(caps, grid.position(i, j, k));

  ProxyMesh proxy;
  proxy.mesh = marching_cubes(grid, 0.0);
  require(!proxy.mesh.empty(), Status::Runtime, "proxy tessellation produced no surface");

  // Skin weights: inverse-square falloff of the distance to each bone capsule,
  // accumulated per joint, truncated to the strongest influences.
  proxy.weights.resize(proxy.mesh.vertices.size());
  for (size_t v = 0; v < proxy.mesh.vertices.size(); ++v) {
    const Vec3& p = proxy.mesh.vertices[v];
    std::vector<double> joint_w(s.joint_count(), 0.0);
    int best_bone = 0;
    double best_d = std::numeric_limits<double>::max();
    for (size_t b = 0; b < caps.size(); ++b) {
      double d = std::max(0.0, caps[b].sdf(p));
      if (d < best_d) {
        best_d = d;
        best_bone = static_cast<int>(b);
      }
      if (d < opts.weight_support) {
        double w = 1.0 / ((opts.weight_softening + d) * (opts.weight_softening + d));
        joint_w[s.bones[b].joint] += w;
      }
    }
    std::vector<std::pair<int, double>> entries;
    for (size_t j = 0; j < joint_w.size(); ++j)
      if (joint_w[j] > 0.0) entries.emplace_back(static_cast<int>(j), joint_w[j]);
    if (entries.empty()) entries.emplace_back(s.bones[best_bone].joint, 1.0);
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.second > b.second; });
    if (static_cast<int>(entries.size()) > opts.max_influences)
      entries.resize(opts.max_influences);
    double sum = 0.0;
    for (const auto& [j, w] : entries) sum += w;
    for (auto& [j, w] : entries) w /= sum;
    std::sort(entries.begin(), entries.end());
    proxy.weights[v] = std::move(entries);
  }

  proxy.rest_normals = proxy.mesh.vertex_normals();
  proxy.validate(s);
  return proxy;
}

Body Body::create(Skeleton s, const TessellationOptions& opts) {
  Body body;
  body.skeleton = std::move(s);
  body.tessellation = opts;
  body.proxy = tessellate_proxy(body.skeleton, opts);
  return body;
}

namespace {

AffineTransform blend_transforms(const std::vector<std::pair<int, double>>& weights,
                                 const std::vector<RigidTransform>& transforms) {
  AffineTransform out;
  for (const auto& [j, w] : weights) out.accumulate(transforms[j], w);
  return out;
}

}  // namespace

std::vector<Vec3> skin_pose(const Body& body, const std::vector<RigidTransform>& transforms) {
  require(transforms.size() == body.skeleton.joint_count(), Status::InvalidArgument,
          "transform count does not match skeleton");
  std::vector<Vec3> out(body.proxy.mesh.vertices.size());
  for (size_t v = 0; v < out.size(); ++v) {
    out[v] = blend_transforms(body.proxy.weights[v], transforms)
                 .apply(body.proxy.mesh.vertices[v]);
  }
  return out;
}

std::vector<Vec3> skin_pose(const Body& body, const Pose& pose) {
  return skin_pose(body, skinning_transforms(body.skeleton, pose));
}

std::vector<Vec3> skin_normals(const Body& body, const std::vector<RigidTransform>& transforms) {
  std::vector<Vec3> out(body.proxy.rest_normals.size());
  for (size_t v = 0; v < out.size(); ++v) {
    Vec3 n = blend_transforms(body.proxy.weights[v], transforms).linear *
             body.proxy.rest_normals[v];
    double len = n.norm();
    out[v] = len > 1e-20 ? Vec3(n / len) : body.proxy.rest_normals[v];
  }
  return out;
}

DepthImage render_depth(const Skeleton& s, const Pose& pose, const Camera& camera) {
  camera.validate();
  std::vector<Capsule> caps = posed_capsules(s, pose);
  DepthImage img = DepthImage::zeros(camera.width, camera.height);
  Vec3 origin = camera.origin();
  // Rows are independent, so the thread count cannot change the output.
  parallel_for(camera.height, [&](size_t y0, size_t y1) {
    for (size_t y = y0; y < y1; ++y) {
      for (int x = 0; x < camera.width; ++x) {
        Vec3 dir = camera.pixel_ray_direction(x, static_cast<double>(y));
        double best_t = std::numeric_limits<double>::max();
        for (const Capsule& c : caps) {
          auto t = ray_capsule(origin, dir, c);
          if (t && *t < best_t) best_t = *t;
        }
        if (best_t < std::numeric_limits<double>::max()) {
          Vec3 hit = origin + best_t * dir;
          double z = camera.world_to_camera(hit).z();
          img.at(x, static_cast<int>(y)) = static_cast<float>(std::max(z, 0.0));
        }
      }
    }
  });
  return img;
}

BitVec compute_visibility(const Body& body, const Pose& pose, const Camera& camera,
                          const DepthImage& depth, const VisibilityOptions& opts) {
  std::vector<RigidTransform> transforms = skinning_transforms(body.skeleton, pose);
  std::vector<Vec3> verts = skin_pose(body, transforms);
  std::vector<Vec3> normals = skin_normals(body, transforms);
  Vec3 cam_origin = camera.origin();

  BitVec visible(verts.size());
  for (size_t v = 0; v < verts.size(); ++v) {
    double u, pv, z;
    if (!camera.project(verts[v], u, pv, z)) continue;
    if (u < 0.0 || pv < 0.0 || u > camera.width - 1.0 || pv > camera.height - 1.0) continue;
    if (normals[v].dot(verts[v] - cam_origin) >= 0.0) continue;  // back-facing
    auto d = depth.sample_nearest(u, pv);
    // An invalid depth pixel has no occluder in front of the vertex.
    if (d && z > *d + opts.depth_tolerance) continue;
    visible.set(v, true);
  }
  return visible;
}

BitVec compute_visibility(const Body& body, const Pose& pose, const Camera& camera,
                          const VisibilityOptions& opts) {
  DepthImage depth = render_depth(body.skeleton, pose, camera);
  return compute_visibility(body, pose, camera, depth, opts);
}

PointWarp::PointWarp(const Body& body, const Pose& src, const Pose& dst, double band)
    : body_(body), band_(band) {
  src_transforms_ = skinning_transforms(body.skeleton, src);
  dst_transforms_ = skinning_transforms(body.skeleton, dst);
  src_capsules_ = posed_capsules(body.skeleton, src_transforms_);

  // When both poses move every joint identically (root-only motion), the
  // blend collapses to one rigid map regardless of the binding.
  auto uniform = [](const std::vector<RigidTransform>& ts) {
    for (const RigidTransform& t : ts) {
      if (!t.rotation.isApprox(ts[0].rotation, 1e-12) ||
          !t.translation.isApprox(ts[0].translation, 1e-12))
        return false;
    }
    return true;
  };
  if (uniform(src_transforms_) && uniform(dst_transforms_)) {
    rigid_ = dst_transforms_[0].compose(src_transforms_[0].inverse());
    return;
  }

  src_vertices_ = skin_pose(body, src_transforms_);
  const double cell = 0.05;  // ~1.5x the proxy vertex spacing
  posed_grid_ = std::make_unique<PointGrid>(src_vertices_, cell);
  rest_grid_ = std::make_unique<PointGrid>(body.proxy.mesh.vertices, cell);
}

namespace {

// Inverse-distance blend of the 4 nearest vertices' joint weights; an exact
// vertex hit adopts that vertex's weights so the warp matches skinning.
std::vector<std::pair<int, double>> bind_weights(const ProxyMesh& proxy,
                                                 const std::vector<Vec3>& positions,
                                                 const PointGrid& grid, const Vec3& p,
                                                 std::vector<int>& nn_scratch) {
  grid.knearest(p, 4, nn_scratch);
  if (nn_scratch.empty()) return {};
  if ((positions[nn_scratch[0]] - p).norm() < 1e-9) return proxy.weights[nn_scratch[0]];

  std::vector<std::pair<int, double>> out;
  double total = 0.0;
  for (int vi : nn_scratch) {
    double inv = 1.0 / (positions[vi] - p).norm();
    total += inv;
    for (const auto& [j, w] : proxy.weights[vi]) {
      double add = inv * w;
      auto it = std::find_if(out.begin(), out.end(),
                             [&](const auto& e) { return e.first == j; });
      if (it == out.end())
        out.emplace_back(j, add);
      else
        it->second += add;
    }
  }
  for (auto& [j, w] : out) w /= total;
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

WarpedPoint PointWarp::warp(const Vec3& p) const {
  WarpedPoint out;
  if (capsule_union_sdf(src_capsules_, p) > band_) return out;
  if (rigid_) {
    out.position = rigid_->apply(p);
    out.ok = true;
    return out;
  }

  std::vector<int> nn;
  // Initial estimate from the posed neighborhood, then re-anchor the binding
  // in rest space until the rest position settles. Both warp directions
  // converge to the same rest binding, which makes the warp invertible.
  std::vector<std::pair<int, double>> weights =
      bind_weights(body_.proxy, src_vertices_, *posed_grid_, p, nn);
  if (weights.empty()) return out;
  Vec3 rest = blend_transforms(weights, src_transforms_).inverse().apply(p);
  for (int iter = 0; iter < 8; ++iter) {
    weights = bind_weights(body_.proxy, body_.proxy.mesh.vertices, *rest_grid_, rest, nn);
    Vec3 next = blend_transforms(weights, src_transforms_).inverse().apply(p);
    double moved = (next - rest).squaredNorm();
    rest = next;
    if (moved < 1e-26) break;
  }
  out.position = blend_transforms(weights, dst_transforms_).apply(rest);
  out.ok = true;
  return out;
}

std::vector<WarpedPoint> PointWarp::warp(const std::vector<Vec3>& pts) const {
  std::vector<WarpedPoint> out(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) out[i] = warp(pts[i]);
  return out;
}

std::vector<WarpedPoint> warp_points(const Body& body, const Pose& src, const Pose& dst,
                                     const std::vector<Vec3>& pts, double band) {
  return PointWarp(body, src, dst, band).warp(pts);
}

}  // namespace pf
