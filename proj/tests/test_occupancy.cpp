#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "error.hpp"
#include "occupancy.hpp"
#include "test_util.hpp"

using namespace pf;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

Camera front_camera(double dist = 1.5) {
  return Camera::look_at(Vec3(0, 0, dist), Vec3(0, 0, 0), Vec3(0, 1, 0), 300, 300, 320, 240);
}

DepthImage constant_depth(int w, int h, float d) {
  DepthImage img = DepthImage::zeros(w, h);
  for (float& v : img.values) v = d;
  return img;
}

}  // namespace

TEST_CASE("analytic occupancy closed-form values") {
  Skeleton s = pftest::sphere_skeleton(0.1);
  AnalyticOccupancy provider(s);
  Pose rest = Pose::rest(s);
  FrameContext ctx{0, &rest, nullptr, nullptr};

  auto values = provider.query(std::vector<Vec3>{Vec3(0, 0, 0),      // center, sdf -0.1
                                                 Vec3(0.1, 0, 0),    // on surface
                                                 Vec3(1.1, 0, 0)},   // 1m out
                               ctx);
  CHECK(values[0] == doctest::Approx(1.0 / (1.0 + std::exp(-20.0))).epsilon(1e-12));
  CHECK(values[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(values[2] < 1e-8);
  for (double v : values) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("analytic occupancy decreases along an outgoing ray") {
  Skeleton s = pftest::capsule_skeleton(0.1, 0.3);
  AnalyticOccupancy provider(s);
  Pose rest = Pose::rest(s);
  FrameContext ctx{0, &rest, nullptr, nullptr};
  std::vector<Vec3> pts;
  for (int i = 0; i <= 50; ++i) pts.push_back(Vec3(0.02 * i, 0.1, 0.01 * i));
  auto values = provider.query(pts, ctx);
  for (size_t i = 1; i < values.size(); ++i) CHECK(values[i] <= values[i - 1] + 1e-12);
}

TEST_CASE("occupancy providers reject non-finite points") {
  Skeleton s = pftest::sphere_skeleton(0.1);
  AnalyticOccupancy provider(s);
  Pose rest = Pose::rest(s);
  FrameContext ctx{0, &rest, nullptr, nullptr};
  std::vector<Vec3> bad = {Vec3(std::nan(""), 0, 0)};
  std::vector<double> out(1);
  CHECK_THROWS_AS(provider.query(std::span<const Vec3>(bad), ctx, std::span<double>(out)), Error);
}

TEST_CASE("psdf against a constant-depth plane") {
  Camera cam = front_camera();
  DepthImage depth = constant_depth(320, 240, 1.0f);  // surface 0.5m in front of origin

  // A point on the optical axis at camera depth 1.03: 3cm behind the surface.
  Vec3 p(0, 0, 1.5 - 1.03);
  auto v = psdf(p, cam, depth);
  REQUIRE(v.has_value());
  CHECK(*v == doctest::Approx(0.03).epsilon(1e-9));

  // Exactly on the observed surface.
  auto on = psdf(Vec3(0, 0, 0.5), cam, depth);
  REQUIRE(on.has_value());
  CHECK(*on == doctest::Approx(0.0).epsilon(1e-9));

  // Positive means behind the observed surface (occluded side).
  CHECK(*psdf(Vec3(0, 0, 0.3), cam, depth) > 0.0);
  CHECK(*psdf(Vec3(0, 0, 0.8), cam, depth) < 0.0);
}

TEST_CASE("psdf unobserved cases") {
  Camera cam = front_camera();
  DepthImage depth = constant_depth(320, 240, 1.0f);
  CHECK(!psdf(Vec3(0, 0, 5.0), cam, depth).has_value());   // behind the camera
  CHECK(!psdf(Vec3(10, 0, 0.5), cam, depth).has_value());  // projects off-image

  depth.at(160, 120) = 0.0f;  // hole at the center
  CHECK(!psdf(Vec3(0, 0, 0.5), cam, depth).has_value());
  // Nearest-sample mode also refuses the hole.
  CHECK(!psdf(Vec3(0, 0, 0.5), cam, depth, false).has_value());
  // Away from the hole both modes observe.
  CHECK(psdf(Vec3(0.2, 0.1, 0.5), cam, depth).has_value());
}

TEST_CASE("depth occupancy ramp") {
  Camera cam = front_camera();
  DepthImage depth = constant_depth(320, 240, 1.0f);
  double mu = 0.04;
  DepthOccupancy provider(mu);
  FrameContext ctx{0, nullptr, &cam, &depth};

  auto values = provider.query(
      std::vector<Vec3>{
          Vec3(0, 0, 0.5),        // on surface -> 0.5
          Vec3(0, 0, 0.5 - mu),   // psdf +mu -> 1
          Vec3(0, 0, 0.5 + mu),   // psdf -mu -> 0
          Vec3(0, 0, 5.0),        // behind camera -> unobserved 0.5
      },
      ctx);
  CHECK(values[0] == doctest::Approx(0.5));
  CHECK(values[1] == doctest::Approx(1.0));
  CHECK(values[2] == doctest::Approx(0.0));
  CHECK(values[3] == doctest::Approx(0.5));
}

TEST_CASE("occupancy grid trilinear interpolation") {
  OccupancyGrid grid;
  grid.dims = Eigen::Vector3i(4, 4, 4);
  grid.origin = Vec3(0, 0, 0);
  grid.voxel_size = 0.5;
  grid.values.resize(64);
  // Linear ramp: 1*i + 10*j + 100*k; trilinear interpolation is exact on it.
  for (int k = 0; k < 4; ++k)
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < 4; ++i) grid.at(i, j, k) = static_cast<float>(i + 10 * j + 100 * k);

  CHECK(grid.sample(Vec3(0.5, 1.0, 1.5)) == doctest::Approx(1 + 20 + 300));  // grid node
  CHECK(grid.sample(Vec3(0.75, 0.25, 0.25)) ==
        doctest::Approx(1.5 + 10 * 0.5 + 100 * 0.5));  // cell center = corner mean
  CHECK(grid.sample(Vec3(-0.1, 0, 0)) == 0.0);
  CHECK(grid.sample(Vec3(0, 0, 1.6)) == 0.0);

  OccupancyGrid constant = grid;
  for (float& v : constant.values) v = 0.25f;
  CHECK(constant.sample(Vec3(0.75, 0.75, 0.75)) == doctest::Approx(0.25));
}

TEST_CASE("PFVO round trip and file provider") {
  OccupancyGrid grid;
  grid.dims = Eigen::Vector3i(3, 4, 5);
  grid.origin = Vec3(-0.1, 0.2, 0.3);
  grid.voxel_size = 0.02;
  grid.values.resize(60);
  pftest::Rng rng(12);
  for (float& v : grid.values) v = static_cast<float>(rng.next_double());

  std::string path = temp_path("pf_test_volume.pfvo");
  save_pfvo(grid, path);
  OccupancyGrid loaded = load_pfvo(path);
  CHECK(loaded.dims == grid.dims);
  CHECK(loaded.values == grid.values);
  CHECK(loaded.voxel_size == doctest::Approx(grid.voxel_size));

  FileVolumeOccupancy provider(path);
  FrameContext ctx{3, nullptr, nullptr, nullptr};
  std::vector<Vec3> nodes;
  std::vector<float> expect;
  for (int k = 0; k < 5; ++k)
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < 3; ++i) {
        nodes.push_back(grid.origin + grid.voxel_size * Vec3(i, j, k));
        expect.push_back(grid.at(i, j, k));
      }
  auto values = provider.query(nodes, ctx);
  for (size_t i = 0; i < nodes.size(); ++i)
    CHECK(values[i] == doctest::Approx(expect[i]).epsilon(1e-6));

  std::filesystem::remove(path);
}

TEST_CASE("malformed PFVO files report the failing offset") {
  std::string path = temp_path("pf_test_bad.pfvo");

  {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    std::fwrite("NOPE", 1, 4, f);
    std::fclose(f);
  }
  CHECK_THROWS_WITH_AS(load_pfvo(path), doctest::Contains("offset 0"), Error);

  {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    std::fwrite("PFVO", 1, 4, f);
    uint32_t dims[3] = {4, 4, 4};
    float geo[4] = {0, 0, 0, 0.1f};
    std::fwrite(dims, 4, 3, f);
    std::fwrite(geo, 4, 4, f);
    float partial[5] = {0, 0, 0, 0, 0};  // 64 expected
    std::fwrite(partial, 4, 5, f);
    std::fclose(f);
  }
  try {
    load_pfvo(path);
    FAIL("expected a format error");
  } catch (const Error& e) {
    CHECK(e.code() == Status::Format);
    CHECK(std::string(e.what()).find("offset") != std::string::npos);
  }
  std::filesystem::remove(path);
}
