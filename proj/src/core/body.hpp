#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "bitvec.hpp"
#include "camera.hpp"
#include "depth_image.hpp"
#include "mesh.hpp"
#include "skeleton.hpp"

namespace pf {

// Watertight capsule-union tessellation with per-vertex skinning weights.
struct ProxyMesh {
  TriMesh mesh;
  std::vector<std::vector<std::pair<int, double>>> weights;  // (joint, w), w sums to 1
  std::vector<Vec3> rest_normals;

  size_t vertex_count() const { return mesh.vertices.size(); }
  void validate(const Skeleton& s) const;
};

struct TessellationOptions {
  double voxel_size = 0.035;       // tuned for ~2000 vertices on the default body
  double weight_support = 0.08;    // bone influence range in meters
  double weight_softening = 0.015; // inverse-square falloff offset
  int max_influences = 4;
};

ProxyMesh tessellate_proxy(const Skeleton& s, const TessellationOptions& opts = {});

// Skeleton + proxy bundled with rest-pose caches.
struct Body {
  Skeleton skeleton;
  ProxyMesh proxy;
  TessellationOptions tessellation;

  static Body create(Skeleton s, const TessellationOptions& opts = {});
  size_t vertex_count() const { return proxy.vertex_count(); }
};

// LBS: vertices transformed by the weight-blended joint transforms.
std::vector<Vec3> skin_pose(const Body& body, const Pose& pose);
std::vector<Vec3> skin_pose(const Body& body, const std::vector<RigidTransform>& transforms);

// Posed vertex normals under the same blend.
std::vector<Vec3> skin_normals(const Body& body, const std::vector<RigidTransform>& transforms);

// Nearest-hit depth (camera-space z) against the posed capsule union.
DepthImage render_depth(const Skeleton& s, const Pose& pose, const Camera& camera);

struct VisibilityOptions {
  double depth_tolerance = 0.01;  // epsilon_vis
};

// Vertex visible iff it projects inside the image, faces the camera, and
// passes the rendered-depth test.
BitVec compute_visibility(const Body& body, const Pose& pose, const Camera& camera,
                          const DepthImage& depth, const VisibilityOptions& opts = {});
// Convenience: renders the depth map itself.
BitVec compute_visibility(const Body& body, const Pose& pose, const Camera& camera,
                          const VisibilityOptions& opts = {});

struct WarpedPoint {
  Vec3 position = Vec3::Zero();
  bool ok = false;  // false: outside the valid band around the source body
};

// Reusable src->dst warp. A point binds the inverse-distance-blended skinning
// weights of its 4 nearest proxy vertices; the binding is anchored in rest
// space (fixed-point iteration on the inverse skin) so that warping back is
// the exact inverse up to floating point.
class PointWarp {
 public:
  PointWarp(const Body& body, const Pose& src, const Pose& dst, double band);

  WarpedPoint warp(const Vec3& p) const;
  std::vector<WarpedPoint> warp(const std::vector<Vec3>& pts) const;

 private:
  const Body& body_;
  double band_;
  std::vector<RigidTransform> src_transforms_;
  std::vector<RigidTransform> dst_transforms_;
  std::vector<Capsule> src_capsules_;
  std::vector<Vec3> src_vertices_;
  std::unique_ptr<PointGrid> posed_grid_;
  std::unique_ptr<PointGrid> rest_grid_;
  std::optional<RigidTransform> rigid_;  // set when both poses are root-rigid
};

std::vector<WarpedPoint> warp_points(const Body& body, const Pose& src, const Pose& dst,
                                     const std::vector<Vec3>& pts, double band);

}  // namespace pf
