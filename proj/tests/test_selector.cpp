#include <doctest.h>

#include <set>

#include "error.hpp"
#include "selector.hpp"
#include "test_util.hpp"

using namespace pf;
using pftest::brute_min_path;
using pftest::matrix_from;
using pftest::random_matrix;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<Pose> single_joint_poses(const std::vector<double>& angles) {
  std::vector<Pose> poses;
  for (double a : angles) {
    Pose p;
    p.joint_rotations = {Vec3(a, 0, 0)};
    poses.push_back(p);
  }
  return poses;
}

BitVec bits(const std::vector<int>& v) {
  BitVec b(v.size());
  for (size_t i = 0; i < v.size(); ++i) b.set(i, v[i] != 0);
  return b;
}

// Two visibility clusters: frames below `split` share pattern A, the rest
// pattern B, complementary enough to force a block boundary.
std::vector<BitVec> clustered_visibility(int n, int split, size_t nverts = 40) {
  std::vector<BitVec> vis;
  for (int i = 0; i < n; ++i) {
    BitVec b(nverts);
    for (size_t v = 0; v < nverts; ++v) {
      bool front = v < nverts / 2;
      b.set(v, i < split ? front : !front);
    }
    vis.push_back(b);
  }
  return vis;
}

}  // namespace

TEST_CASE("min cost path on the 3x3 hand example") {
  EnergyMatrix e = matrix_from({{1, 5, 9}, {5, 1, 9}, {9, 5, 1}});
  KeyframeTrail trail = min_cost_path(e, Block{0, 3}, 1);
  CHECK(trail.t == std::vector<int>{0, 1, 2});
  CHECK(trail.total_cost == doctest::Approx(3.0));

  pftest::BrutePath brute = brute_min_path(e, Block{0, 3}, 1);
  CHECK(brute.cost == doctest::Approx(trail.total_cost));
  CHECK(brute.t == trail.t);
}

TEST_CASE("unconstrained window reduces to per-row argmins") {
  pftest::Rng rng(5);
  EnergyMatrix e = random_matrix(rng, 6, false);
  KeyframeTrail dp = min_cost_path(e, Block{0, 6}, 6);
  KeyframeTrail pf = per_frame_path(e, Block{0, 6});
  CHECK(dp.t == pf.t);
  CHECK(dp.total_cost == doctest::Approx(pf.total_cost));
}

TEST_CASE("single-frame base case picks the cheapest feasible column") {
  EnergyMatrix e1 = matrix_from({{7}});
  KeyframeTrail trail = min_cost_path(e1, Block{0, 1}, 2);
  CHECK(trail.t == std::vector<int>{0});
  CHECK(trail.total_cost == doctest::Approx(7.0));

  // Single-row block of a larger matrix: candidates span the whole sequence.
  EnergyMatrix e3 = matrix_from({{4, 2, 7}, {1, 0.5, 1}, {3, 3, 3}});
  KeyframeTrail sub = min_cost_path(e3, Block{0, 1}, 2);
  CHECK(sub.t == std::vector<int>{1});
  CHECK(sub.total_cost == doctest::Approx(2.0));
}

TEST_CASE("DP equals exhaustive enumeration on random matrices") {
  pftest::Rng rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    int n = 2 + static_cast<int>(rng.next_below(7));  // up to 8
    int tau = 1 + static_cast<int>(rng.next_below(3));
    EnergyMatrix e = random_matrix(rng, n, true);
    KeyframeTrail dp = min_cost_path(e, Block{0, n}, tau);
    pftest::BrutePath brute = brute_min_path(e, Block{0, n}, tau);
    REQUIRE(std::isfinite(brute.cost));
    CHECK(dp.total_cost == doctest::Approx(brute.cost).epsilon(1e-12));
    CHECK(dp.t == brute.t);  // ties resolved identically (lexicographic)
  }
}

TEST_CASE("greedy follows the footnote rule and DP never does worse") {
  EnergyMatrix e = matrix_from({{0, 1, 9}, {9, 0, 9}, {0, 9, 9}});
  KeyframeTrail greedy = greedy_path(e, Block{0, 3}, 1);
  CHECK(greedy.t == std::vector<int>{0, 1, 0});
  CHECK(greedy.total_cost == doctest::Approx(0.0));
  KeyframeTrail dp = min_cost_path(e, Block{0, 3}, 1);
  CHECK(dp.total_cost == doctest::Approx(0.0));
}

TEST_CASE("greedy can be trapped by its first choice") {
  EnergyMatrix e = matrix_from({{0, 5}, {9, 0}});
  KeyframeTrail greedy = greedy_path(e, Block{0, 2}, 0);
  CHECK(greedy.t == std::vector<int>{0, 0});
  CHECK(greedy.total_cost == doctest::Approx(9.0));
  KeyframeTrail dp = min_cost_path(e, Block{0, 2}, 0);
  CHECK(dp.t == std::vector<int>{1, 1});
  CHECK(dp.total_cost == doctest::Approx(5.0));
}

TEST_CASE("method cost ordering holds on random matrices") {
  pftest::Rng rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    int n = 3 + static_cast<int>(rng.next_below(10));  // up to 12
    int tau = 1 + static_cast<int>(rng.next_below(3));
    EnergyMatrix e = random_matrix(rng, n, true);
    double c_pf = per_frame_path(e, Block{0, n}).total_cost;
    double c_dp = min_cost_path(e, Block{0, n}, tau).total_cost;
    double c_gr = greedy_path(e, Block{0, n}, tau).total_cost;
    CHECK(c_pf <= c_dp + 1e-12);
    CHECK(c_dp <= c_gr + 1e-12);
  }
}

TEST_CASE("infeasible rows raise errors that name the row") {
  EnergyMatrix e = matrix_from({{1, 2, 3}, {kInf, kInf, kInf}, {1, 2, 3}});
  CHECK_THROWS_WITH_AS(min_cost_path(e, Block{0, 3}, 1), doctest::Contains("row 1"), Error);
  CHECK_THROWS_WITH_AS(greedy_path(e, Block{0, 3}, 1), doctest::Contains("row 1"), Error);
  CHECK_THROWS_WITH_AS(per_frame_path(e, Block{0, 3}), doctest::Contains("row 1"), Error);
  try {
    min_cost_path(e, Block{0, 3}, 1);
  } catch (const Error& err) {
    CHECK(err.code() == Status::Infeasible);
  }
}

TEST_CASE("block division splits at visibility changes") {
  // Static scene: no complementarity anywhere -> one block.
  EnergyMatrix statexe;
  statexe.n = 8;
  statexe.cost.assign(64, 0.0);
  statexe.visibility_part.assign(64, 1.0);  // E_visibility == 0
  BlockPartition p = divide_blocks(statexe, 0.3);
  CHECK(p.blocks.size() == 1);
  CHECK(p.blocks[0].begin == 0);
  CHECK(p.blocks[0].end == 8);

  // Two clusters with strong complementarity across the split.
  auto vis = clustered_visibility(10, 6);
  std::vector<KeyframeSetState> states;
  for (int i = 0; i < 10; ++i) states.push_back(KeyframeSetState::initial(i, vis[i]));
  std::vector<double> pose_part(100, 0.0);
  EnergyMatrix e = build_energy_matrix(pose_part, vis, states, 1.5);
  BlockPartition q = divide_blocks(e, 0.3);
  REQUIRE(q.blocks.size() == 2);
  CHECK(q.blocks[0].begin == 0);
  CHECK(q.blocks[0].end == 6);
  CHECK(q.blocks[1].begin == 6);
  CHECK(q.blocks[1].end == 10);

  // Unreachable threshold keeps everything in one block.
  CHECK(divide_blocks(e, 1.0).blocks.size() == 1);
}

TEST_CASE("select_keyframes with K=1 collapses to one DP trail") {
  auto poses = single_joint_poses({0.0, 0.1, 0.25, 0.3, 0.5, 0.65});
  // Identical visibility: single block, no visibility reward.
  std::vector<BitVec> vis(6, bits({1, 1, 1, 1, 0, 0}));
  SelectionConfig scfg;
  scfg.iterations = 1;
  scfg.denoise_neighbors = 0;
  EnergyConfig ecfg;
  KeyframePlan plan = select_keyframes(poses, vis, scfg, ecfg);

  REQUIRE(plan.blocks.blocks.size() == 1);
  REQUIRE(plan.iterations.size() == 1);
  EnergyMatrix e = build_energy_matrix(
      pose_energy_matrix(poses, ecfg), vis,
      [&] {
        std::vector<KeyframeSetState> states;
        for (int i = 0; i < 6; ++i) states.push_back(KeyframeSetState::initial(i, vis[i]));
        return states;
      }(),
      scfg.lambda_first);
  KeyframeTrail direct = min_cost_path(e, Block{0, 6}, scfg.half_window);
  CHECK(plan.iterations[0].selected == direct.t);
  for (int i = 0; i < 6; ++i) {
    CHECK(plan.keyframes[i] ==
          std::vector<int>{std::min(i, direct.t[i]), std::max(i, direct.t[i])});
  }
}

TEST_CASE("coverage popcount never decreases across iterations") {
  pftest::Rng rng(31);
  int n = 14;
  size_t nverts = 60;
  std::vector<Pose> poses;
  std::vector<BitVec> vis;
  for (int i = 0; i < n; ++i) {
    Pose p;
    p.joint_rotations = {Vec3(rng.uniform(-1, 1), 0, 0)};
    poses.push_back(p);
    BitVec b(nverts);
    for (size_t v = 0; v < nverts; ++v) b.set(v, rng.next_double() < 0.45);
    vis.push_back(b);
  }
  SelectionConfig scfg;  // K = 4
  KeyframePlan plan = select_keyframes(poses, vis, scfg, EnergyConfig{});
  REQUIRE(plan.iterations.size() == 4);
  for (int i = 0; i < n; ++i) {
    size_t prev = 0;
    for (const auto& it : plan.iterations) {
      CHECK(it.coverage_popcount[i] >= prev);
      prev = it.coverage_popcount[i];
    }
  }
}

TEST_CASE("selection is deterministic") {
  auto poses = single_joint_poses({0.0, 0.3, 0.1, 0.7, 0.2, 0.9, 0.45, 0.05});
  auto vis = clustered_visibility(8, 4);
  SelectionConfig scfg;
  scfg.fifo_size = 3;
  KeyframePlan a = select_keyframes(poses, vis, scfg, EnergyConfig{});
  KeyframePlan b = select_keyframes(poses, vis, scfg, EnergyConfig{});
  CHECK(a.keyframes == b.keyframes);
  REQUIRE(a.iterations.size() == b.iterations.size());
  for (size_t i = 0; i < a.iterations.size(); ++i) {
    CHECK(a.iterations[i].selected == b.iterations[i].selected);
    CHECK(a.iterations[i].fifo_sets == b.iterations[i].fifo_sets);
  }
}

TEST_CASE("trails satisfy the window constraint inside every block") {
  pftest::Rng rng(57);
  int n = 24;
  std::vector<Pose> poses;
  for (int i = 0; i < n; ++i) {
    Pose p;
    p.joint_rotations = {Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), 0)};
    poses.push_back(p);
  }
  auto vis = clustered_visibility(n, 13);
  SelectionConfig scfg;
  KeyframePlan plan = select_keyframes(poses, vis, scfg, EnergyConfig{});
  for (const auto& it : plan.iterations) {
    for (const auto& trail : it.trails) {
      for (size_t i = 0; i + 1 < trail.t.size(); ++i) {
        CHECK(std::abs(trail.t[i + 1] - trail.t[i]) <= scfg.half_window);
      }
    }
  }
}

TEST_CASE("FIFO regions shift by at most one element per frame") {
  auto vis = clustered_visibility(30, 15);
  std::vector<Pose> poses;
  for (int i = 0; i < 30; ++i) {
    Pose p;
    p.joint_rotations = {Vec3(0.05 * i, 0, 0)};
    poses.push_back(p);
  }
  SelectionConfig scfg;
  scfg.fifo_size = 5;
  KeyframePlan plan = select_keyframes(poses, vis, scfg, EnergyConfig{});

  bool saw_region = false;
  for (const auto& it : plan.iterations) {
    for (int i = 0; i + 1 < 30; ++i) {
      const auto& a = it.fifo_sets[i];
      const auto& b = it.fifo_sets[i + 1];
      if (a.empty() || b.empty()) continue;
      saw_region = true;
      std::set<int> sa(a.begin(), a.end()), sb(b.begin(), b.end());
      std::vector<int> only_a, only_b;
      std::set_difference(sa.begin(), sa.end(), sb.begin(), sb.end(),
                          std::back_inserter(only_a));
      std::set_difference(sb.begin(), sb.end(), sa.begin(), sa.end(),
                          std::back_inserter(only_b));
      CHECK(only_a.size() <= 1);
      CHECK(only_b.size() <= 1);
    }
  }
  CHECK(saw_region);
}

TEST_CASE("keyframe sets contain the frame and its block-clipped neighbors") {
  auto vis = clustered_visibility(20, 11);
  std::vector<Pose> poses;
  for (int i = 0; i < 20; ++i) {
    Pose p;
    p.joint_rotations = {Vec3(0.07 * i, 0, 0)};
    poses.push_back(p);
  }
  SelectionConfig scfg;
  KeyframePlan plan = select_keyframes(poses, vis, scfg, EnergyConfig{});
  for (int i = 0; i < 20; ++i) {
    const Block& block = plan.blocks.blocks[plan.blocks.block_of(i)];
    for (int d = -scfg.denoise_neighbors; d <= scfg.denoise_neighbors; ++d) {
      int f = i + d;
      if (f >= block.begin && f < block.end) {
        CHECK(std::binary_search(plan.keyframes[i].begin(), plan.keyframes[i].end(), f));
      }
    }
  }
}
