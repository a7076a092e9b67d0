#pragma once

#include <optional>
#include <vector>

#include "body.hpp"
#include "occupancy.hpp"
#include "selector.hpp"
#include "volume.hpp"

namespace pf {

struct FusionConfig {
  double voxel_size = 0.01;
  double band = 0.08;
  double blend_tau = 0.02;     // meters
  double blend_sigma = 100.0;  // 1/m
  double weight_floor = 1e-4;
  double iso_level = 0.5;
  bool bilinear_depth = true;

  void validate() const;
};

struct CollisionConfig {
  double tau1 = 0.02;                // contact distance in the current frame
  double tau2 = 0.05;                // separation distance in the keyframe
  double resolve_proportion = 0.30;
  int search_radius = 15;            // frames scanned on each side
  double mask_distance = 0.05;       // d_max of the distance-transform weight

  void validate() const;
};

// Eq.-10 adaptive weight: full confidence up to tau past the observed
// surface, exponential falloff beyond; unobserved points contribute nothing.
double blend_weight(std::optional<double> psdf_value, const FusionConfig& cfg);

// Read access to the per-frame sequence data during fusion.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual int frame_count() const = 0;
  virtual const Pose& pose(int frame) = 0;
  virtual const Camera& camera(int frame) = 0;
  virtual const DepthImage* depth(int frame) = 0;  // null when unavailable
};

struct FuseTimings {
  double deform_ms = 0.0;
  double query_ms = 0.0;
  double blend_ms = 0.0;
};

struct FuseResult {
  VoxelVolume volume;
  std::vector<int> keyframes;
  size_t valid_voxels = 0;
  FuseTimings timings;
};

// Core fusion pass for one frame: band the volume around the posed body, warp
// every valid voxel to each keyframe, query occupancy, and accumulate with the
// adaptive blend weight. The finalized field is a convex combination of the
// queried values per voxel. When `per_keyframe_weights` is given, each
// keyframe's blend-weight field is collected as an intermediate dump.
FuseResult fuse_frame(const Body& body, FrameSource& frames, const std::vector<int>& keyframes,
                      int frame, const OccupancyProvider& provider, const FusionConfig& cfg,
                      std::vector<std::pair<int, OccupancyGrid>>* per_keyframe_weights = nullptr);

struct CollisionSet {
  std::vector<int> vertices;                 // sorted V_c
  std::vector<std::pair<int, int>> pairs;    // colliding (i, j), i < j
  bool empty() const { return vertices.empty(); }
};

// Supp-style pairwise test: contact in the current frame, separation in the
// keyframe; rest-adjacent vertex pairs never count.
CollisionSet detect_collisions(const std::vector<Vec3>& posed_current,
                               const std::vector<Vec3>& posed_keyframe,
                               const std::vector<Vec3>& rest, const CollisionConfig& cfg);

struct CollisionResolution {
  bool found = false;
  int frame = -1;
};

// Nearest frame (earlier wins ties) where under `resolve_proportion` of the
// collided vertices are still stuck to every partner they collided with.
CollisionResolution find_no_collision_frame(const Body& body, FrameSource& frames, int frame,
                                            const CollisionSet& collisions,
                                            const CollisionConfig& cfg);

// Node-lattice occupancy of a closed mesh by x-ray parity counting.
std::vector<uint8_t> voxelize_mesh(const TriMesh& mesh, const Vec3& origin, double voxel_size,
                                   const Eigen::Vector3i& dims);

struct CollisionFusionInfo {
  std::vector<uint8_t> mask;    // seed voxels of the distance transform
  std::vector<double> alpha;    // blend factor per voxel
  size_t mask_count = 0;
};

// Replaces fused occupancy with the voxelized deformed model, blended by a
// distance-transform weight that fades to zero at mask_distance. Voxels with
// zero weight are left untouched.
void apply_collision_fusion(VoxelVolume& volume, const TriMesh& deformed_model,
                            const std::vector<Vec3>& posed_vertices,
                            const std::vector<int>& collided_vertices,
                            const CollisionConfig& cfg, CollisionFusionInfo* info = nullptr);

// Marching cubes over the finalized field (Interior voxels read 1, Exterior
// 0); empty when the field never crosses the iso level.
TriMesh extract_mesh(const VoxelVolume& volume, double iso_level);

}  // namespace pf
