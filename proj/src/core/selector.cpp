#include "selector.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "error.hpp"
#include "log.hpp"

namespace pf {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void SelectionConfig::validate() const {
  require(iterations >= 1, Status::InvalidArgument, "iterations must be >= 1");
  require(half_window >= 0, Status::InvalidArgument, "half window must be >= 0");
  require(fifo_size >= 1, Status::InvalidArgument, "fifo size must be >= 1");
  require(block_threshold > 0.0 && block_threshold < 1.0, Status::InvalidArgument,
          "block threshold must lie in (0,1)");
  require(denoise_neighbors >= 0, Status::InvalidArgument, "denoise neighbors must be >= 0");
}

const char* selection_method_name(SelectionMethod m) {
  switch (m) {
    case SelectionMethod::Dp: return "dp";
    case SelectionMethod::Greedy: return "greedy";
    case SelectionMethod::PerFrame: return "perframe";
  }
  return "?";
}

SelectionMethod selection_method_from_name(const std::string& name) {
  if (name == "dp") return SelectionMethod::Dp;
  if (name == "greedy") return SelectionMethod::Greedy;
  if (name == "perframe") return SelectionMethod::PerFrame;
  fail(Status::InvalidArgument, "unknown selection method '%s' (want dp|greedy|perframe)",
       name.c_str());
}

int BlockPartition::block_of(int frame) const {
  for (size_t b = 0; b < blocks.size(); ++b)
    if (blocks[b].contains(frame)) return static_cast<int>(b);
  return -1;
}

KeyframeTrail min_cost_path(const EnergyMatrix& e, const Block& range, int tau) {
  const int m = range.size();
  const int n = e.n;  // candidate columns span the whole sequence
  require(m >= 1, Status::InvalidArgument, "min_cost_path: empty range");

  for (int i = 0; i < m; ++i) {
    bool any = false;
    for (int j = 0; j < n && !any; ++j) any = std::isfinite(e.at(range.begin + i, j));
    if (!any) fail(Status::Infeasible, "min_cost_path: no feasible keyframe for row %d",
                   range.begin + i);
  }

  // Suffix costs: best[i][j] = E[row i][col j] + min over the window in row
  // i+1. Forward reconstruction then yields the lexicographically smallest
  // optimal trail.
  std::vector<double> suffix(static_cast<size_t>(m) * n);
  auto sfx = [&](int i, int j) -> double& { return suffix[static_cast<size_t>(i) * n + j]; };

  for (int j = 0; j < n; ++j) sfx(m - 1, j) = e.at(range.begin + m - 1, j);
  for (int i = m - 2; i >= 0; --i) {
    for (int j = 0; j < n; ++j) {
      double best_next = kInf;
      for (int j2 = std::max(0, j - tau); j2 <= std::min(n - 1, j + tau); ++j2)
        best_next = std::min(best_next, sfx(i + 1, j2));
      sfx(i, j) = e.at(range.begin + i, j) + best_next;
    }
  }

  KeyframeTrail trail;
  trail.begin = range.begin;
  trail.t.resize(m);
  int prev = -1;
  for (int i = 0; i < m; ++i) {
    int lo = i == 0 ? 0 : std::max(0, prev - tau);
    int hi = i == 0 ? n - 1 : std::min(n - 1, prev + tau);
    double best = kInf;
    int best_j = -1;
    for (int j = lo; j <= hi; ++j) {
      if (sfx(i, j) < best) {
        best = sfx(i, j);
        best_j = j;
      }
    }
    if (best_j < 0 || std::isinf(best)) {
      fail(Status::Infeasible, "min_cost_path: no feasible keyframe for row %d", range.begin + i);
    }
    trail.t[i] = best_j;
    trail.total_cost += e.at(range.begin + i, best_j);
    prev = best_j;
  }
  return trail;
}

KeyframeTrail greedy_path(const EnergyMatrix& e, const Block& range, int tau) {
  const int m = range.size();
  const int n = e.n;
  require(m >= 1, Status::InvalidArgument, "greedy_path: empty range");
  KeyframeTrail trail;
  trail.begin = range.begin;
  trail.t.resize(m);
  int prev = -1;
  for (int i = 0; i < m; ++i) {
    int lo = i == 0 ? 0 : std::max(0, prev - tau);
    int hi = i == 0 ? n - 1 : std::min(n - 1, prev + tau);
    double best = kInf;
    int best_j = -1;
    for (int j = lo; j <= hi; ++j) {
      double v = e.at(range.begin + i, j);
      if (v < best) {
        best = v;
        best_j = j;
      }
    }
    if (best_j < 0 || std::isinf(best)) {
      fail(Status::Infeasible, "greedy_path: no feasible keyframe for row %d", range.begin + i);
    }
    trail.t[i] = best_j;
    trail.total_cost += best;
    prev = best_j;
  }
  return trail;
}

KeyframeTrail per_frame_path(const EnergyMatrix& e, const Block& range) {
  const int m = range.size();
  const int n = e.n;
  require(m >= 1, Status::InvalidArgument, "per_frame_path: empty range");
  KeyframeTrail trail;
  trail.begin = range.begin;
  trail.t.resize(m);
  for (int i = 0; i < m; ++i) {
    double best = kInf;
    int best_j = -1;
    for (int j = 0; j < n; ++j) {
      double v = e.at(range.begin + i, j);
      if (v < best) {
        best = v;
        best_j = j;
      }
    }
    if (best_j < 0 || std::isinf(best)) {
      fail(Status::Infeasible, "per_frame_path: no feasible keyframe for row %d", range.begin + i);
    }
    trail.t[i] = best_j;
    trail.total_cost += best;
  }
  return trail;
}

BlockPartition divide_blocks(const EnergyMatrix& first_iteration, double threshold) {
  BlockPartition part;
  const int n = first_iteration.n;
  int anchor = 0;
  for (int j = 1; j < n; ++j) {
    double complementarity = 1.0 - first_iteration.ev(anchor, j);
    if (complementarity > threshold) {
      part.blocks.push_back({anchor, j});
      anchor = j;
    }
  }
  part.blocks.push_back({anchor, n});
  return part;
}

void KeyframePlan::validate() const {
  require(static_cast<int>(keyframes.size()) == frame_count, Status::InvalidArgument,
          "plan keyframe list does not match frame count");
  for (int i = 0; i < frame_count; ++i) {
    require(std::binary_search(keyframes[i].begin(), keyframes[i].end(), i),
            Status::InvalidArgument, "plan keyframe set must contain its own frame");
    for (int k : keyframes[i])
      require(k >= 0 && k < frame_count, Status::InvalidArgument,
              "plan keyframe index out of range");
  }
}

KeyframePlan select_keyframes(const std::vector<Pose>& poses,
                              const std::vector<BitVec>& visibility,
                              const SelectionConfig& scfg, const EnergyConfig& ecfg,
                              SelectionMethod method) {
  const int n = static_cast<int>(poses.size());
  require(n >= 2, Status::InvalidArgument, "selection needs at least 2 frames");
  require(visibility.size() == poses.size(), Status::InvalidArgument,
          "visibility count does not match pose count");
  scfg.validate();

  KeyframePlan plan;
  plan.frame_count = n;
  plan.vertex_count = visibility[0].size();
  plan.config = scfg;
  plan.method = method;

  std::vector<KeyframeSetState> states;
  states.reserve(n);
  for (int i = 0; i < n; ++i) states.push_back(KeyframeSetState::initial(i, visibility[i]));

  const std::vector<double> pose_part = pose_energy_matrix(poses, ecfg);

  for (int it = 0; it < scfg.iterations; ++it) {
    const double lambda = it == 0 ? scfg.lambda_first : scfg.lambda_rest;
    EnergyMatrix e = build_energy_matrix(pose_part, visibility, states, lambda);
    if (it == 0) {
      plan.blocks = divide_blocks(e, scfg.block_threshold);
      PF_LOG_DEBUG("selector: %zu block(s) over %d frames", plan.blocks.blocks.size(), n);
    }

    IterationRecord rec;
    rec.lambda = lambda;
    rec.selected.assign(n, -1);
    rec.fifo_sets.assign(n, {});
    rec.coverage_popcount.assign(n, 0);

    if (method == SelectionMethod::PerFrame) {
      KeyframeTrail trail = per_frame_path(e, Block{0, n});
      rec.selected = trail.t;
      rec.trails.push_back(std::move(trail));
    } else {
      for (const Block& block : plan.blocks.blocks) {
        KeyframeTrail trail = method == SelectionMethod::Dp
                                  ? min_cost_path(e, block, scfg.half_window)
                                  : greedy_path(e, block, scfg.half_window);
        for (int i = 0; i < block.size(); ++i) rec.selected[block.begin + i] = trail.t[i];
        rec.trails.push_back(std::move(trail));
      }
    }

    // Boundary regions take their keyframe set from a FIFO queue seeded with
    // the selections just before the boundary; each frame snapshots the queue
    // and then pushes its own selection.
    std::vector<char> in_region(n, 0);
    if (method != SelectionMethod::PerFrame) {
      for (size_t bi = 1; bi < plan.blocks.blocks.size(); ++bi) {
        const Block& block = plan.blocks.blocks[bi];
        const int boundary = block.begin;
        std::deque<int> queue;
        for (int f = std::max(0, boundary - scfg.fifo_size); f < boundary; ++f)
          queue.push_back(rec.selected[f]);
        const int region_end = std::min(boundary + scfg.fifo_size, block.end);
        for (int i = boundary; i < region_end; ++i) {
          in_region[i] = 1;
          std::vector<int> snapshot(queue.begin(), queue.end());
          std::sort(snapshot.begin(), snapshot.end());
          snapshot.erase(std::unique(snapshot.begin(), snapshot.end()), snapshot.end());
          rec.fifo_sets[i] = snapshot;
          for (int k : snapshot) states[i].add(k, visibility[k]);
          queue.push_back(rec.selected[i]);
          if (static_cast<int>(queue.size()) > scfg.fifo_size) queue.pop_front();
        }
      }
    }

    for (int i = 0; i < n; ++i) {
      states[i].add(rec.selected[i], visibility[rec.selected[i]]);
      rec.coverage_popcount[i] = states[i].coverage.popcount();
    }

    plan.iterations.push_back(std::move(rec));
  }

  // Denoise neighbors, clipped to the frame's own block.
  plan.keyframes.resize(n);
  for (int i = 0; i < n; ++i) {
    Block block{0, n};
    if (method != SelectionMethod::PerFrame) {
      int bi = plan.blocks.block_of(i);
      if (bi >= 0) block = plan.blocks.blocks[bi];
    }
    for (int d = -scfg.denoise_neighbors; d <= scfg.denoise_neighbors; ++d) {
      int f = i + d;
      if (f >= block.begin && f < block.end) states[i].add(f, visibility[f]);
    }
    plan.keyframes[i] = states[i].selected;
  }

  plan.validate();
  return plan;
}

}  // namespace pf
