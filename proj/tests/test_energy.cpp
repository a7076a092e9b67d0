#include <doctest.h>

#include "energy.hpp"
#include "error.hpp"
#include "test_util.hpp"

using namespace pf;

namespace {

Pose two_joint_pose(const Vec3& r0, const Vec3& r1) {
  Pose p;
  p.joint_rotations = {r0, r1};
  return p;
}

BitVec bits(const std::vector<int>& v) {
  BitVec b(v.size());
  for (size_t i = 0; i < v.size(); ++i) b.set(i, v[i] != 0);
  return b;
}

}  // namespace

TEST_CASE("pose energy hand-computed example") {
  Pose a = two_joint_pose(Vec3(0.1, 0, 0), Vec3(0, 0, 0));
  Pose b = two_joint_pose(Vec3(0.3, 0, 0), Vec3(0, 0, 0));
  EnergyConfig cfg;
  CHECK(pose_energy(a, b, cfg) == doctest::Approx(0.04).epsilon(1e-12));
  CHECK(pose_energy(a, a, cfg) == 0.0);
}

TEST_CASE("root transform never contributes to pose energy") {
  Pose a = two_joint_pose(Vec3(0.2, 0.3, 0), Vec3(0, 0.1, 0));
  Pose b = a;
  b.root_translation = Vec3(5, 5, 5);
  b.root_rotation = Vec3(0, 2, 0);
  EnergyConfig cfg;
  CHECK(pose_energy(a, b, cfg) == 0.0);
}

TEST_CASE("pose energy is symmetric and non-negative") {
  pftest::Rng rng(3);
  EnergyConfig cfg;
  for (int trial = 0; trial < 100; ++trial) {
    Pose a = two_joint_pose(Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), 0),
                            Vec3(0, rng.uniform(-1, 1), 0));
    Pose b = two_joint_pose(Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), 0),
                            Vec3(0, rng.uniform(-1, 1), 0));
    double ab = pose_energy(a, b, cfg);
    CHECK(ab >= 0.0);
    CHECK(ab == doctest::Approx(pose_energy(b, a, cfg)));
  }
}

TEST_CASE("excluded joints and weights are honored") {
  Pose a = two_joint_pose(Vec3(0.1, 0, 0), Vec3(0.5, 0, 0));
  Pose b = two_joint_pose(Vec3(0.3, 0, 0), Vec3(0.9, 0, 0));
  EnergyConfig cfg;
  cfg.excluded_joints = {1};
  CHECK(pose_energy(a, b, cfg) == doctest::Approx(0.04));
  cfg.excluded_joints.clear();
  cfg.joint_weights = {2.0, 0.5};
  CHECK(pose_energy(a, b, cfg) == doctest::Approx(2.0 * 0.04 + 0.5 * 0.16));

  cfg.joint_weights = {0.0, 0.0};
  CHECK_THROWS_AS(pose_energy(a, b, cfg), Error);  // no joint left to compare
}

TEST_CASE("visibility energy bit-count example") {
  KeyframeSetState state{{0}, bits({1, 1, 0, 0, 0, 0})};
  CHECK(visibility_energy(state, bits({0, 0, 1, 1, 0, 0})) == doctest::Approx(0.5));
  // Candidate inside existing coverage adds nothing.
  CHECK(visibility_energy(state, bits({1, 1, 0, 0, 0, 0})) == 0.0);
  // Empty coverage, full candidate.
  KeyframeSetState none{{0}, bits({0, 0, 0, 0, 0, 0})};
  CHECK(visibility_energy(none, bits({1, 1, 1, 1, 1, 1})) == doctest::Approx(1.0));
  // Full coverage: denominator is zero, complementarity is null.
  KeyframeSetState full{{0}, bits({1, 1, 1, 1, 1, 1})};
  CHECK(visibility_energy(full, bits({1, 0, 1, 0, 1, 0})) == 0.0);
}

// Note: the ratio itself is not monotone under coverage growth (its
// denominator shrinks too); the newly-revealed vertex count is.
TEST_CASE("visibility energy bounds and monotone numerator") {
  pftest::Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    size_t n = 64 + rng.next_below(64);
    BitVec cov(n), extra(n), cand(n);
    for (size_t i = 0; i < n; ++i) {
      cov.set(i, rng.next_double() < 0.4);
      extra.set(i, rng.next_double() < 0.3);
      cand.set(i, rng.next_double() < 0.5);
    }
    KeyframeSetState state{{0}, cov};
    double before = visibility_energy(state, cand);
    CHECK(before >= 0.0);
    CHECK(before <= 1.0);
    size_t new_before = state.coverage.andnot_popcount(cand);
    state.add(1, extra);
    CHECK(visibility_energy(state, cand) >= 0.0);
    CHECK(visibility_energy(state, cand) <= 1.0);
    CHECK(state.coverage.andnot_popcount(cand) <= new_before);
    // Absorbing the candidate itself always kills its complementarity.
    state.add(2, cand);
    CHECK(visibility_energy(state, cand) == 0.0);
  }
}

TEST_CASE("energy matrix assembly") {
  // Six vertices; frame visibilities engineered so E_visibility(K_0, 1) = 0.5.
  std::vector<BitVec> vis = {bits({1, 1, 0, 0, 0, 0}), bits({0, 0, 1, 1, 0, 0})};
  std::vector<Pose> poses = {two_joint_pose(Vec3(0.1, 0, 0), Vec3(0, 0, 0)),
                             two_joint_pose(Vec3(0.3, 0, 0), Vec3(0, 0, 0))};
  std::vector<KeyframeSetState> states = {KeyframeSetState::initial(0, vis[0]),
                                          KeyframeSetState::initial(1, vis[1])};
  EnergyConfig cfg;
  cfg.lambda_visibility = 1.5;
  EnergyMatrix e = build_energy_matrix(poses, vis, states, cfg);

  CHECK(e.at(0, 1) == doctest::Approx(0.04 - 0.75).epsilon(1e-12));  // -0.71
  CHECK(std::isinf(e.at(0, 0)));
  CHECK(std::isinf(e.at(1, 1)));
  CHECK(e.ev(0, 1) == doctest::Approx(0.5));
  CHECK(e.ev(0, 0) == doctest::Approx(1.0));

  // Zero lambda degenerates to the symmetric pose-energy matrix.
  cfg.lambda_visibility = 0.0;
  EnergyMatrix ep = build_energy_matrix(poses, vis, states, cfg);
  CHECK(ep.at(0, 1) == doctest::Approx(0.04));
  CHECK(ep.at(0, 1) == doctest::Approx(ep.at(1, 0)));

  // Absorbing frame 1 into K_0 kills the visibility reward.
  states[0].add(1, vis[1]);
  cfg.lambda_visibility = 1.5;
  EnergyMatrix e2 = build_energy_matrix(poses, vis, states, cfg);
  CHECK(e2.at(0, 1) == doctest::Approx(0.04));
  CHECK(e2.ev(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("E_v entries stay in [0,1] on random inputs") {
  pftest::Rng rng(23);
  size_t nverts = 40;
  int n = 8;
  std::vector<BitVec> vis;
  std::vector<Pose> poses;
  std::vector<KeyframeSetState> states;
  for (int i = 0; i < n; ++i) {
    BitVec b(nverts);
    for (size_t v = 0; v < nverts; ++v) b.set(v, rng.next_double() < 0.5);
    vis.push_back(b);
    poses.push_back(two_joint_pose(Vec3(rng.uniform(-1, 1), 0, 0), Vec3(rng.uniform(-1, 1), 0, 0)));
    states.push_back(KeyframeSetState::initial(i, vis.back()));
  }
  EnergyConfig cfg;
  EnergyMatrix e = build_energy_matrix(poses, vis, states, cfg);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      CHECK(e.ev(i, j) >= 0.0);
      CHECK(e.ev(i, j) <= 1.0);
      // E_v and E_visibility sum to 1 by construction.
      CHECK(e.ev(i, j) + visibility_energy(states[i], vis[j]) == doctest::Approx(1.0));
    }
  }
}
