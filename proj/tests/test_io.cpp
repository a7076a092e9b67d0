#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "depth_image.hpp"
#include "error.hpp"
#include "mesh.hpp"
#include "test_util.hpp"

using namespace pf;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("PFDM depth images round trip bit-exactly") {
  pftest::Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    DepthImage img = DepthImage::zeros(5 + static_cast<int>(rng.next_below(60)),
                                       5 + static_cast<int>(rng.next_below(40)));
    for (float& v : img.values)
      v = rng.next_double() < 0.3 ? 0.0f : static_cast<float>(rng.uniform(0.2, 5.0));
    std::string path = temp_path("pf_test_depth.pfdm");
    save_pfdm(img, path);
    DepthImage loaded = load_pfdm(path);
    CHECK(loaded.width == img.width);
    CHECK(loaded.height == img.height);
    CHECK(loaded.values == img.values);
    std::filesystem::remove(path);
  }
}

TEST_CASE("malformed PFDM files are rejected with offsets") {
  std::string path = temp_path("pf_test_bad.pfdm");
  {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    std::fwrite("JUNK", 1, 4, f);
    std::fclose(f);
  }
  CHECK_THROWS_WITH_AS(load_pfdm(path), doctest::Contains("offset 0"), Error);

  {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    uint32_t header[3] = {8, 8, 0};
    std::fwrite("PFDM", 1, 4, f);
    std::fwrite(header, 4, 3, f);
    float partial[10] = {};
    std::fwrite(partial, 4, 10, f);  // 64 expected
    std::fclose(f);
  }
  try {
    load_pfdm(path);
    FAIL("expected format error");
  } catch (const Error& e) {
    CHECK(e.code() == Status::Format);
    CHECK(std::string(e.what()).find("offset") != std::string::npos);
  }
  CHECK_THROWS_AS(load_pfdm(temp_path("pf_does_not_exist.pfdm")), Error);
  std::filesystem::remove(path);
}

TEST_CASE("bilinear depth sampling vetoes invalid taps") {
  DepthImage img = DepthImage::zeros(4, 4);
  for (float& v : img.values) v = 2.0f;
  img.at(2, 2) = 0.0f;

  CHECK(img.sample_bilinear(0.5, 0.5).value() == doctest::Approx(2.0));
  CHECK(!img.sample_bilinear(1.5, 1.5).has_value());  // footprint touches the hole
  CHECK(!img.sample_bilinear(-0.5, 1.0).has_value());
  CHECK(!img.sample_bilinear(3.5, 1.0).has_value());
  CHECK(img.sample_nearest(0.6, 0.6).value() == doctest::Approx(2.0));
  CHECK(!img.sample_nearest(2.2, 2.2).has_value());
}

TEST_CASE("PLY round trip") {
  TriMesh mesh = pftest::make_uv_sphere(Vec3(0.1, -0.2, 0.3), 0.4, 12, 18);
  std::string path = temp_path("pf_test_mesh.ply");
  save_ply(mesh, path);
  TriMesh loaded = load_ply(path);
  REQUIRE(loaded.vertices.size() == mesh.vertices.size());
  REQUIRE(loaded.triangles.size() == mesh.triangles.size());
  for (size_t i = 0; i < mesh.vertices.size(); ++i)
    CHECK((loaded.vertices[i] - mesh.vertices[i]).norm() < 1e-5);
  CHECK(loaded.triangles == mesh.triangles);

  // Idempotent rewrite: byte-identical files.
  std::string path2 = temp_path("pf_test_mesh2.ply");
  save_ply(loaded, path2);
  save_ply(load_ply(path2), path);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  std::string c1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string c2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(c1 == c2);
  std::filesystem::remove(path);
  std::filesystem::remove(path2);
}

TEST_CASE("OBJ export writes 1-based indices") {
  TriMesh mesh;
  mesh.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  mesh.triangles = {{0, 1, 2}};
  std::string path = temp_path("pf_test_mesh.obj");
  save_obj(mesh, path);
  std::ifstream in(path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(content.find("f 1 2 3") != std::string::npos);
  std::filesystem::remove(path);
}
