#include <doctest.h>

#include "capsule.hpp"
#include "geometry.hpp"
#include "test_util.hpp"

using namespace pf;

TEST_CASE("axis-angle rotation basics") {
  Mat3 rx = axis_angle_to_matrix(Vec3(M_PI / 2, 0, 0));
  Vec3 rotated = rx * Vec3(0, 1, 0);
  CHECK(rotated.isApprox(Vec3(0, 0, 1), 1e-12));
  CHECK(axis_angle_to_matrix(Vec3::Zero()).isApprox(Mat3::Identity()));
}

TEST_CASE("axis-angle normalization preserves the rotation") {
  pftest::Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    Vec3 aa(rng.uniform(-8, 8), rng.uniform(-8, 8), rng.uniform(-8, 8));
    Vec3 norm = normalize_axis_angle(aa);
    CHECK(norm.norm() <= M_PI + 1e-12);
    CHECK(axis_angle_to_matrix(aa).isApprox(axis_angle_to_matrix(norm), 1e-9));
  }
}

TEST_CASE("rigid transform compose and inverse") {
  RigidTransform a;
  a.rotation = axis_angle_to_matrix(Vec3(0.3, -0.2, 0.9));
  a.translation = Vec3(1, -2, 0.5);
  RigidTransform b;
  b.rotation = axis_angle_to_matrix(Vec3(-1.1, 0.4, 0.0));
  b.translation = Vec3(0.2, 0.1, -0.7);

  Vec3 p(0.3, 0.7, -0.2);
  CHECK(a.compose(b).apply(p).isApprox(a.apply(b.apply(p)), 1e-12));
  CHECK(a.inverse().apply(a.apply(p)).isApprox(p, 1e-12));
}

TEST_CASE("capsule signed distance") {
  Capsule sphere{Vec3(1, 2, 3), Vec3(1, 2, 3), 0.5};
  CHECK(sphere.sdf(Vec3(1, 2, 3)) == doctest::Approx(-0.5));
  CHECK(sphere.sdf(Vec3(1.5, 2, 3)) == doctest::Approx(0.0));
  CHECK(sphere.sdf(Vec3(3, 2, 3)) == doctest::Approx(1.5));

  Capsule cap{Vec3(0, 0, 0), Vec3(1, 0, 0), 0.2};
  CHECK(cap.sdf(Vec3(0.5, 0, 0)) == doctest::Approx(-0.2));
  CHECK(cap.sdf(Vec3(0.5, 0.5, 0)) == doctest::Approx(0.3));
  CHECK(cap.sdf(Vec3(-0.3, 0, 0)) == doctest::Approx(0.1));
}

TEST_CASE("ray-capsule intersection matches sphere tracing") {
  std::vector<Capsule> shapes = {
      {Vec3(0, 0, 2), Vec3(0, 0, 2), 0.3},
      {Vec3(-0.4, 0.1, 1.5), Vec3(0.5, -0.2, 2.5), 0.25},
      {Vec3(0, -1, 3), Vec3(0, 1, 3), 0.5},
  };
  pftest::Rng rng(11);
  int hits = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const Capsule& c = shapes[trial % shapes.size()];
    Vec3 origin(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.5, 0.0));
    Vec3 target = c.closest_axis_point(Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), 2.0)) +
                  Vec3(rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6));
    Vec3 dir = (target - origin).normalized();

    // Oracle: conservative sphere tracing on the capsule SDF.
    double t = 0.0;
    bool oracle_hit = false;
    for (int step = 0; step < 600; ++step) {
      double d = c.sdf(origin + t * dir);
      if (d < 1e-9) {
        oracle_hit = true;
        break;
      }
      t += d;
      if (t > 20.0) break;
    }

    auto analytic = ray_capsule(origin, dir, c);
    CHECK(analytic.has_value() == oracle_hit);
    if (analytic && oracle_hit) {
      CHECK(*analytic == doctest::Approx(t).epsilon(1e-5));
      ++hits;
    }
  }
  CHECK(hits > 100);  // the sampling actually exercised hits
}

TEST_CASE("ray-capsule miss returns nothing") {
  Capsule c{Vec3(0, 0, 5), Vec3(0, 1, 5), 0.2};
  CHECK(!ray_capsule(Vec3(0, 0, 0), Vec3(0, 0, -1), c).has_value());
  CHECK(!ray_capsule(Vec3(2, 0, 0), Vec3(0, 0, 1), c).has_value());
}

TEST_CASE("capsule union surface sampling stays on the boundary") {
  std::vector<Capsule> caps = {
      {Vec3(0, 0, 0), Vec3(0, 0.4, 0), 0.12},
      {Vec3(0, 0.3, 0), Vec3(0.3, 0.5, 0), 0.08},
  };
  auto samples = sample_capsule_union_surface(caps, 2000, 42);
  CHECK(samples.size() == 2000);
  for (const Vec3& p : samples) {
    CHECK(std::abs(capsule_union_sdf(caps, p)) < 1e-7);
  }
}
