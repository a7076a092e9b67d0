#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "camera.hpp"
#include "depth_image.hpp"
#include "skeleton.hpp"

namespace pf {

// Per-frame inputs a provider may consult; pointers may be null when the
// sequence lacks that stream.
struct FrameContext {
  int frame = -1;
  const Pose* pose = nullptr;
  const Camera* camera = nullptr;
  const DepthImage* depth = nullptr;
};

// Occupancy in [0,1]; values above 0.5 are inside the body. Deterministic
// per input; implementations must be safe to call concurrently.
class OccupancyProvider {
 public:
  virtual ~OccupancyProvider() = default;
  virtual std::string name() const = 0;
  virtual void query(std::span<const Vec3> points, const FrameContext& ctx,
                     std::span<double> out) const = 0;

  std::vector<double> query(const std::vector<Vec3>& points, const FrameContext& ctx) const {
    std::vector<double> out(points.size());
    query(std::span<const Vec3>(points), ctx, std::span<double>(out));
    return out;
  }
};

// Projected signed distance: camera-space z minus the sampled depth at the
// projection; positive behind the observed surface. nullopt when the point is
// behind the camera, projects off-image, or any contributing pixel is invalid.
std::optional<double> psdf(const Vec3& point, const Camera& camera, const DepthImage& depth,
                           bool bilinear = true);

struct AnalyticOracleConfig {
  double sharpness = 200.0;  // 1/m
};

// Ground-truth oracle: sigmoid of the signed distance to the posed capsule
// union; exactly 0.5 on the surface.
class AnalyticOccupancy : public OccupancyProvider {
 public:
  AnalyticOccupancy(const Skeleton& skeleton, AnalyticOracleConfig cfg = {});
  std::string name() const override { return "analytic"; }
  using OccupancyProvider::query;
  void query(std::span<const Vec3> points, const FrameContext& ctx,
             std::span<double> out) const override;

 private:
  const Skeleton& skeleton_;
  AnalyticOracleConfig cfg_;
};

// Depth-backed provider: 0.5 + psdf/(2*band), clamped; unobserved points are
// uninformative (0.5).
class DepthOccupancy : public OccupancyProvider {
 public:
  explicit DepthOccupancy(double band, bool bilinear = true);
  std::string name() const override { return "depth"; }
  using OccupancyProvider::query;
  void query(std::span<const Vec3> points, const FrameContext& ctx,
             std::span<double> out) const override;

 private:
  double band_;
  bool bilinear_;
};

// Dense occupancy samples on a regular grid; node (i,j,k) sits at
// origin + voxel_size*(i,j,k). On disk: "PFVO", u32 dims[3], f32 origin[3],
// f32 voxel_size, then little-endian f32 values, x-fastest.
struct OccupancyGrid {
  Eigen::Vector3i dims = Eigen::Vector3i::Zero();
  Vec3 origin = Vec3::Zero();
  double voxel_size = 0.0;
  std::vector<float> values;

  size_t index(int i, int j, int k) const {
    return (static_cast<size_t>(k) * dims.y() + j) * dims.x() + i;
  }
  float at(int i, int j, int k) const { return values[index(i, j, k)]; }
  float& at(int i, int j, int k) { return values[index(i, j, k)]; }
  // Trilinear interpolation; 0 outside the grid bounds.
  double sample(const Vec3& p) const;
};

void save_pfvo(const OccupancyGrid& grid, const std::string& path);
OccupancyGrid load_pfvo(const std::string& path);

// File-backed provider; "{frame}" in the path pattern is replaced with the
// 1-based frame index, otherwise one volume serves every frame.
class FileVolumeOccupancy : public OccupancyProvider {
 public:
  explicit FileVolumeOccupancy(std::string path_pattern);
  std::string name() const override { return "file"; }
  using OccupancyProvider::query;
  void query(std::span<const Vec3> points, const FrameContext& ctx,
             std::span<double> out) const override;

 private:
  const OccupancyGrid& grid_for(int frame) const;

  std::string pattern_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<int, std::unique_ptr<OccupancyGrid>> cache_;
};

}  // namespace pf
