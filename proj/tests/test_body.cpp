#include <doctest.h>

#include "body.hpp"
#include "error.hpp"
#include "test_util.hpp"

using namespace pf;
using pftest::shared_body;

namespace {

// One joint at `joint_pos` with a single fully-bound vertex.
Body single_joint_body(const Vec3& joint_pos, const Vec3& vertex) {
  Body body;
  body.skeleton.joints.push_back({"root", -1, joint_pos});
  body.skeleton.bones.push_back({0, 0.05, 0.1});
  body.proxy.mesh.vertices.push_back(vertex);
  body.proxy.weights.push_back({{0, 1.0}});
  body.proxy.rest_normals.push_back(Vec3(0, 1, 0));
  return body;
}

Pose articulated_pose(const Skeleton& s) {
  Pose p = Pose::rest(s);
  p.joint_rotations[4] = Vec3(0, 0, -0.5);  // l_shoulder
  p.joint_rotations[5] = Vec3(0.6, 0, 0);   // l_elbow
  p.joint_rotations[10] = Vec3(0.4, 0, 0);  // l_hip
  p.joint_rotations[11] = Vec3(-0.5, 0, 0); // l_knee
  p.root_rotation = Vec3(0, 0.4, 0);
  p.root_translation = Vec3(0.05, -0.02, 0.1);
  return p;
}

}  // namespace

TEST_CASE("identity pose reproduces rest vertices") {
  const Body& body = shared_body();
  auto posed = skin_pose(body, Pose::rest(body.skeleton));
  for (size_t i = 0; i < posed.size(); ++i) {
    CHECK((posed[i] - body.proxy.mesh.vertices[i]).norm() < 1e-12);
  }
}

TEST_CASE("pure root translation shifts every vertex exactly") {
  const Body& body = shared_body();
  Pose p = Pose::rest(body.skeleton);
  p.root_translation = Vec3(0.3, -1.2, 2.5);
  auto posed = skin_pose(body, p);
  for (size_t i = 0; i < posed.size(); ++i) {
    CHECK((posed[i] - body.proxy.mesh.vertices[i] - p.root_translation).norm() < 1e-12);
  }
}

TEST_CASE("single-joint rotation moves a fully bound vertex on the circle") {
  Vec3 joint(0.3, 0.2, 0.1);
  Body body = single_joint_body(joint, joint + Vec3(0, 1, 0));
  Pose p;
  p.joint_rotations = {Vec3(M_PI / 2, 0, 0)};  // 90 degrees about x
  auto posed = skin_pose(body, p);
  CHECK(posed[0].isApprox(joint + Vec3(0, 0, 1), 1e-12));
}

TEST_CASE("child joints rotate about their parent") {
  Skeleton s;
  s.joints.push_back({"a", -1, Vec3(0, 0, 0)});
  s.joints.push_back({"b", 0, Vec3(1, 0, 0)});
  s.bones.push_back({0, 0.05, 1.0});
  s.bones.push_back({1, 0.05, 0.5});

  Body body;
  body.skeleton = s;
  body.proxy.mesh.vertices.push_back(Vec3(1.5, 0, 0));  // on the child bone
  body.proxy.weights.push_back({{1, 1.0}});
  body.proxy.rest_normals.push_back(Vec3(0, 1, 0));

  Pose p = Pose::rest(s);
  p.joint_rotations[0] = Vec3(0, 0, M_PI / 2);  // root rotates the whole chain
  auto posed = skin_pose(body, p);
  CHECK(posed[0].isApprox(Vec3(0, 1.5, 0), 1e-12));

  p = Pose::rest(s);
  p.joint_rotations[1] = Vec3(0, 0, M_PI / 2);  // child rotates about itself
  posed = skin_pose(body, p);
  CHECK(posed[0].isApprox(Vec3(1.0, 0.5, 0), 1e-12));
}

TEST_CASE("pose validation rejects mismatched joint counts") {
  const Body& body = shared_body();
  Pose p;
  p.joint_rotations.assign(3, Vec3::Zero());
  CHECK_THROWS_AS(skin_pose(body, p), Error);
}

TEST_CASE("default proxy is watertight with unit-sum weights") {
  const Body& body = shared_body();
  const TriMesh& m = body.proxy.mesh;
  CHECK(m.vertices.size() > 1000);
  CHECK(m.vertices.size() < 4000);
  CHECK(boundary_edge_count(m) == 0);
  CHECK(nonmanifold_edge_count(m) == 0);
  CHECK(connected_component_count(m) == 1);
  body.proxy.validate(body.skeleton);  // throws on any weight violation
  for (const auto& w : body.proxy.weights) CHECK(w.size() <= 4);
}

TEST_CASE("render_depth: body behind camera is fully invalid") {
  const Body& body = shared_body();
  // Body is near the origin; look the other way.
  Camera cam = Camera::look_at(Vec3(0, 0.9, 2.2), Vec3(0, 0.9, 4.0), Vec3(0, 1, 0), 300, 300,
                               160, 120);
  DepthImage img = render_depth(body.skeleton, Pose::rest(body.skeleton), cam);
  for (float v : img.values) CHECK(v == 0.0f);
}

TEST_CASE("render_depth: on-axis capsule hits at d - r") {
  Skeleton s = pftest::sphere_skeleton(0.3);
  Camera cam;
  cam.fx = cam.fy = 300;
  cam.cx = 160;
  cam.cy = 120;
  cam.width = 320;
  cam.height = 240;  // identity extrinsic: camera at origin looking +z

  Pose p = Pose::rest(s);
  p.root_translation = Vec3(0, 0, 2.0);  // sphere center at depth 2
  DepthImage img = render_depth(s, p, cam);
  CHECK(img.at(160, 120) == doctest::Approx(2.0 - 0.3).epsilon(1e-4));
}

TEST_CASE("render_depth respects the SDF lower bound") {
  const Body& body = shared_body();
  Pose pose = articulated_pose(body.skeleton);
  Camera cam = Camera::look_at(Vec3(0.3, 1.0, 2.4), Vec3(0, 0.9, 0), Vec3(0, 1, 0), 240, 240,
                               200, 160);
  DepthImage img = render_depth(body.skeleton, pose, cam);
  std::vector<Capsule> caps = posed_capsules(body.skeleton, pose);
  Vec3 origin = cam.origin();
  double cam_clearance = capsule_union_sdf(caps, origin);

  int valid = 0;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (!img.valid(x, y)) continue;
      ++valid;
      Vec3 dir = cam.pixel_ray_direction(x, y);
      // Recover the hit point from the stored camera-space depth.
      double dz = (cam.extrinsic.rotation * dir).z();
      double t = img.at(x, y) / dz;
      Vec3 hit = origin + t * dir;
      CHECK(std::abs(capsule_union_sdf(caps, hit)) < 1e-6);
      CHECK(t >= cam_clearance - 1e-4);
    }
  }
  CHECK(valid > 500);
}

TEST_CASE("render_depth is deterministic") {
  const Body& body = shared_body();
  Camera cam = Camera::look_at(Vec3(0, 0.9, 2.2), Vec3(0, 0.9, 0), Vec3(0, 1, 0), 300, 300, 160,
                               120);
  DepthImage a = render_depth(body.skeleton, Pose::rest(body.skeleton), cam);
  DepthImage b = render_depth(body.skeleton, Pose::rest(body.skeleton), cam);
  CHECK(a.values == b.values);
}

TEST_CASE("visibility on a sphere matches the normal-sign oracle") {
  Body body = Body::create(pftest::sphere_skeleton(0.15), TessellationOptions{.voxel_size = 0.02});
  Pose rest = Pose::rest(body.skeleton);
  Camera cam = Camera::look_at(Vec3(0, 0, 1.5), Vec3(0, 0, 0), Vec3(0, 1, 0), 300, 300, 320, 240);
  BitVec visible = compute_visibility(body, rest, cam);
  CHECK(visible.size() == body.vertex_count());

  Vec3 origin = cam.origin();
  size_t mismatches = 0;
  for (size_t v = 0; v < body.vertex_count(); ++v) {
    bool oracle =
        body.proxy.rest_normals[v].dot(body.proxy.mesh.vertices[v] - origin) < 0.0;
    if (oracle != visible.get(v)) ++mismatches;
  }
  CHECK(mismatches <= body.vertex_count() / 20);  // 5% silhouette band
}

TEST_CASE("visibility is empty outside the frustum") {
  const Body& body = shared_body();
  Camera cam = Camera::look_at(Vec3(0, 0.9, 2.2), Vec3(0, 0.9, 4.0), Vec3(0, 1, 0), 300, 300,
                               160, 120);
  BitVec visible = compute_visibility(body, Pose::rest(body.skeleton), cam);
  CHECK(visible.popcount() == 0);
}

TEST_CASE("front and back cameras cover a symmetric body almost fully") {
  // Opposing views of a convex body miss a band of width ~radius/distance
  // around the silhouette, so keep the cameras far relative to the radius.
  Body body =
      Body::create(pftest::sphere_skeleton(0.1), TessellationOptions{.voxel_size = 0.015});
  Pose rest = Pose::rest(body.skeleton);
  Camera front = Camera::look_at(Vec3(0, 0, 4.0), Vec3(0, 0, 0), Vec3(0, 1, 0), 1500, 1500, 320,
                                 240);
  Camera back = Camera::look_at(Vec3(0, 0, -4.0), Vec3(0, 0, 0), Vec3(0, 1, 0), 1500, 1500, 320,
                                240);
  BitVec a = compute_visibility(body, rest, front);
  BitVec b = compute_visibility(body, rest, back);
  a.or_with(b);
  CHECK(a.popcount() >= body.vertex_count() * 95 / 100);
}

TEST_CASE("warp with identical poses is the identity") {
  const Body& body = shared_body();
  Pose pose = articulated_pose(body.skeleton);
  std::vector<Capsule> caps = posed_capsules(body.skeleton, pose);
  std::vector<Vec3> points = sample_capsule_union_surface(caps, 200, 5);
  auto warped = warp_points(body, pose, pose, points, 0.08);
  for (size_t i = 0; i < points.size(); ++i) {
    REQUIRE(warped[i].ok);
    CHECK((warped[i].position - points[i]).norm() < 1e-5);
  }
}

TEST_CASE("warp between pure root translations is the translation difference") {
  const Body& body = shared_body();
  Pose a = Pose::rest(body.skeleton);
  a.root_translation = Vec3(0.1, 0.2, -0.3);
  Pose b = Pose::rest(body.skeleton);
  b.root_translation = Vec3(-0.4, 0.0, 0.25);
  std::vector<Vec3> points =
      sample_capsule_union_surface(posed_capsules(body.skeleton, a), 100, 6);
  auto warped = warp_points(body, a, b, points, 0.08);
  Vec3 delta = b.root_translation - a.root_translation;
  for (size_t i = 0; i < points.size(); ++i) {
    REQUIRE(warped[i].ok);
    CHECK((warped[i].position - points[i] - delta).norm() < 1e-9);
  }
}

TEST_CASE("warping a proxy vertex matches its skinned position") {
  const Body& body = shared_body();
  Pose src = articulated_pose(body.skeleton);
  Pose dst = Pose::rest(body.skeleton);
  auto src_verts = skin_pose(body, src);
  auto dst_verts = skin_pose(body, dst);
  PointWarp warp(body, src, dst, 0.08);
  for (size_t v = 0; v < src_verts.size(); v += 97) {
    WarpedPoint wp = warp.warp(src_verts[v]);
    REQUIRE(wp.ok);
    CHECK((wp.position - dst_verts[v]).norm() < 1e-4);
  }
}

namespace {

std::vector<Vec3> band_points(const Body& body, const Pose& pose, int count, uint64_t seed) {
  std::vector<Capsule> caps = posed_capsules(body.skeleton, pose);
  pftest::Rng rng(seed);
  std::vector<Vec3> points;
  for (const Vec3& s : sample_capsule_union_surface(caps, count, seed + 1)) {
    Vec3 offset(rng.uniform(-0.06, 0.06), rng.uniform(-0.06, 0.06), rng.uniform(-0.06, 0.06));
    Vec3 p = s + offset;
    if (std::abs(capsule_union_sdf(caps, p)) <= 0.08) points.push_back(p);
  }
  return points;
}

}  // namespace

TEST_CASE("warp round trip is exact where the binding is unambiguous") {
  const Body& body = shared_body();
  Pose a = Pose::rest(body.skeleton);
  Pose b = a;
  b.root_rotation = Vec3(0, 0.9, 0);
  b.root_translation = Vec3(0.05, -0.02, 0.1);
  b.joint_rotations[5] = Vec3(0.5, 0, 0);  // l_elbow

  std::vector<Vec3> points = band_points(body, a, 300, 17);
  REQUIRE(points.size() > 100);
  PointWarp forward(body, a, b, 0.08);
  PointWarp backward(body, b, a, 0.20);  // generous band for the return trip
  for (const Vec3& p : points) {
    WarpedPoint there = forward.warp(p);
    REQUIRE(there.ok);
    WarpedPoint back = backward.warp(there.position);
    REQUIRE(back.ok);
    CHECK((back.position - p).norm() < 1e-4);
  }
}

TEST_CASE("warp round trip under strong articulation fails only at fold zones") {
  // Points in gaps between differently-moving parts (armpit, inner thighs,
  // bent creases) bind ambiguously; that residual is what collision handling
  // compensates for downstream.
  const Body& body = shared_body();
  Pose a = Pose::rest(body.skeleton);
  Pose b = articulated_pose(body.skeleton);

  std::vector<Vec3> points = band_points(body, a, 400, 17);
  REQUIRE(points.size() > 200);
  PointWarp forward(body, a, b, 0.08);
  PointWarp backward(body, b, a, 0.20);
  size_t ok = 0;
  for (const Vec3& p : points) {
    WarpedPoint there = forward.warp(p);
    REQUIRE(there.ok);
    WarpedPoint back = backward.warp(there.position);
    REQUIRE(back.ok);
    if ((back.position - p).norm() < 1e-4) ++ok;
  }
  CHECK(ok >= points.size() * 95 / 100);
}

TEST_CASE("points far from the body are unwarpable") {
  const Body& body = shared_body();
  Pose rest = Pose::rest(body.skeleton);
  auto warped = warp_points(body, rest, rest, {Vec3(3, 3, 3)}, 0.08);
  CHECK(!warped[0].ok);
}
