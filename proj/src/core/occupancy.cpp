#include "occupancy.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>

#include "error.hpp"

namespace pf {

namespace {

void check_points(std::span<const Vec3> points) {
  for (const Vec3& p : points)
    require(p.allFinite(), Status::InvalidArgument, "occupancy query point is not finite");
}

}  // namespace

std::optional<double> psdf(const Vec3& point, const Camera& camera, const DepthImage& depth,
                           bool bilinear) {
  double u, v, z;
  if (!camera.project(point, u, v, z)) return std::nullopt;
  std::optional<double> d = bilinear ? depth.sample_bilinear(u, v) : depth.sample_nearest(u, v);
  if (!d) return std::nullopt;
  return z - *d;
}

AnalyticOccupancy::AnalyticOccupancy(const Skeleton& skeleton, AnalyticOracleConfig cfg)
    : skeleton_(skeleton), cfg_(cfg) {
  require(cfg_.sharpness > 0.0, Status::InvalidArgument, "oracle sharpness must be positive");
}

void AnalyticOccupancy::query(std::span<const Vec3> points, const FrameContext& ctx,
                              std::span<double> out) const {
  require(ctx.pose != nullptr, Status::InvalidArgument, "analytic occupancy needs a pose");
  check_points(points);
  std::vector<Capsule> caps = posed_capsules(skeleton_, *ctx.pose);
  for (size_t i = 0; i < points.size(); ++i) {
    double x = cfg_.sharpness * capsule_union_sdf(caps, points[i]);
    out[i] = 1.0 / (1.0 + std::exp(std::clamp(x, -500.0, 500.0)));
  }
}

DepthOccupancy::DepthOccupancy(double band, bool bilinear) : band_(band), bilinear_(bilinear) {
  require(band > 0.0, Status::InvalidArgument, "depth occupancy band must be positive");
}

void DepthOccupancy::query(std::span<const Vec3> points, const FrameContext& ctx,
                           std::span<double> out) const {
  require(ctx.camera != nullptr && ctx.depth != nullptr, Status::InvalidArgument,
          "depth occupancy needs a camera and a depth image");
  check_points(points);
  for (size_t i = 0; i < points.size(); ++i) {
    std::optional<double> p = psdf(points[i], *ctx.camera, *ctx.depth, bilinear_);
    out[i] = p ? std::clamp(0.5 + *p / (2.0 * band_), 0.0, 1.0) : 0.5;
  }
}

double OccupancyGrid::sample(const Vec3& p) const {
  Vec3 local = (p - origin) / voxel_size;
  // Tolerate float-precision jitter right on the boundary.
  const double eps = 1e-5;
  if (local.x() < -eps || local.y() < -eps || local.z() < -eps ||
      local.x() > dims.x() - 1.0 + eps || local.y() > dims.y() - 1.0 + eps ||
      local.z() > dims.z() - 1.0 + eps)
    return 0.0;
  local = local.cwiseMax(Vec3::Zero()).cwiseMin(Vec3(dims.x() - 1.0, dims.y() - 1.0, dims.z() - 1.0));
  int i0 = std::min(static_cast<int>(local.x()), dims.x() - 2);
  int j0 = std::min(static_cast<int>(local.y()), dims.y() - 2);
  int k0 = std::min(static_cast<int>(local.z()), dims.z() - 2);
  i0 = std::max(i0, 0);
  j0 = std::max(j0, 0);
  k0 = std::max(k0, 0);
  double fx = local.x() - i0, fy = local.y() - j0, fz = local.z() - k0;
  auto v = [&](int di, int dj, int dk) {
    return static_cast<double>(at(std::min(i0 + di, dims.x() - 1), std::min(j0 + dj, dims.y() - 1),
                                  std::min(k0 + dk, dims.z() - 1)));
  };
  double c00 = v(0, 0, 0) * (1 - fx) + v(1, 0, 0) * fx;
  double c10 = v(0, 1, 0) * (1 - fx) + v(1, 1, 0) * fx;
  double c01 = v(0, 0, 1) * (1 - fx) + v(1, 0, 1) * fx;
  double c11 = v(0, 1, 1) * (1 - fx) + v(1, 1, 1) * fx;
  return (c00 * (1 - fy) + c10 * fy) * (1 - fz) + (c01 * (1 - fy) + c11 * fy) * fz;
}

void save_pfvo(const OccupancyGrid& grid, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  require(f != nullptr, Status::Io, "cannot open for writing: " + path);
  uint32_t dims[3] = {static_cast<uint32_t>(grid.dims.x()), static_cast<uint32_t>(grid.dims.y()),
                      static_cast<uint32_t>(grid.dims.z())};
  float geo[4] = {static_cast<float>(grid.origin.x()), static_cast<float>(grid.origin.y()),
                  static_cast<float>(grid.origin.z()), static_cast<float>(grid.voxel_size)};
  bool ok = std::fwrite("PFVO", 1, 4, f) == 4 && std::fwrite(dims, 4, 3, f) == 3 &&
            std::fwrite(geo, 4, 4, f) == 4 &&
            std::fwrite(grid.values.data(), 4, grid.values.size(), f) == grid.values.size();
  std::fclose(f);
  require(ok, Status::Io, "short write: " + path);
}

OccupancyGrid load_pfvo(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  require(f != nullptr, Status::Io, "cannot open: " + path);
  char magic[4];
  if (std::fread(magic, 1, 4, f) != 4 || std::memcmp(magic, "PFVO", 4) != 0) {
    std::fclose(f);
    fail(Status::Format, "not a PFVO file (bad magic at offset 0): %s", path.c_str());
  }
  uint32_t dims[3];
  float geo[4];
  if (std::fread(dims, 4, 3, f) != 3) {
    std::fclose(f);
    fail(Status::Format, "truncated PFVO dims at offset 4: %s", path.c_str());
  }
  if (std::fread(geo, 4, 4, f) != 4) {
    std::fclose(f);
    fail(Status::Format, "truncated PFVO geometry at offset 16: %s", path.c_str());
  }
  OccupancyGrid grid;
  grid.dims = Eigen::Vector3i(static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                              static_cast<int>(dims[2]));
  grid.origin = Vec3(geo[0], geo[1], geo[2]);
  grid.voxel_size = geo[3];
  uint64_t count = static_cast<uint64_t>(dims[0]) * dims[1] * dims[2];
  if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1 || count > (1ull << 31) ||
      !(grid.voxel_size > 0.0f)) {
    std::fclose(f);
    fail(Status::Format, "implausible PFVO header (%ux%ux%u, voxel %g): %s", dims[0], dims[1],
         dims[2], grid.voxel_size, path.c_str());
  }
  grid.values.resize(count);
  size_t got = std::fread(grid.values.data(), 4, grid.values.size(), f);
  std::fclose(f);
  if (got != grid.values.size()) {
    fail(Status::Format, "truncated PFVO payload at offset %zu: %s", 32 + got * 4, path.c_str());
  }
  return grid;
}

FileVolumeOccupancy::FileVolumeOccupancy(std::string path_pattern)
    : pattern_(std::move(path_pattern)) {}

const OccupancyGrid& FileVolumeOccupancy::grid_for(int frame) const {
  std::string path = pattern_;
  size_t pos = path.find("{frame}");
  int key = 0;
  if (pos != std::string::npos) {
    path.replace(pos, 7, std::to_string(frame + 1));
    key = frame;
  }
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    it = cache_.emplace(key, std::make_unique<OccupancyGrid>(load_pfvo(path))).first;
  }
  return *it->second;
}

void FileVolumeOccupancy::query(std::span<const Vec3> points, const FrameContext& ctx,
                                std::span<double> out) const {
  check_points(points);
  const OccupancyGrid& grid = grid_for(ctx.frame);
  for (size_t i = 0; i < points.size(); ++i)
    out[i] = std::clamp(grid.sample(points[i]), 0.0, 1.0);
}

}  // namespace pf
