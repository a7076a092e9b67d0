#pragma once

#include <string>
#include <vector>

#include "energy.hpp"

namespace pf {

struct SelectionConfig {
  int iterations = 4;          // K
  int half_window = 2;         // tau_w
  double lambda_first = 1.5;
  double lambda_rest = 3.0;
  double block_threshold = 0.3;
  int fifo_size = 10;
  int denoise_neighbors = 3;

  void validate() const;
};

enum class SelectionMethod { Dp = 0, Greedy = 1, PerFrame = 2 };

const char* selection_method_name(SelectionMethod m);
SelectionMethod selection_method_from_name(const std::string& name);

// Half-open frame range [begin, end).
struct Block {
  int begin = 0;
  int end = 0;
  int size() const { return end - begin; }
  bool contains(int i) const { return i >= begin && i < end; }
};

struct BlockPartition {
  std::vector<Block> blocks;
  int block_of(int frame) const;
};

struct KeyframeTrail {
  int begin = 0;             // first row (absolute frame index)
  std::vector<int> t;        // selected column per row, absolute indices
  double total_cost = 0.0;
};

// Minimum-cost windowed path over the block's rows; candidate columns span
// the whole sequence. Minimizes sum_i E[i][t_i] subject to
// |t_{i+1} - t_i| <= tau, ties resolving to the lexicographically smallest
// trail.
KeyframeTrail min_cost_path(const EnergyMatrix& e, const Block& range, int tau);

// First-row argmin, then argmin within the window around the previous pick.
KeyframeTrail greedy_path(const EnergyMatrix& e, const Block& range, int tau);

// Row-wise argmin; no continuity constraint.
KeyframeTrail per_frame_path(const EnergyMatrix& e, const Block& range);

// Greedy segmentation of the first-iteration visibility matrix: a block keeps
// absorbing frames while the complementarity against its anchor stays at or
// below the threshold.
BlockPartition divide_blocks(const EnergyMatrix& first_iteration, double threshold);

struct IterationRecord {
  double lambda = 0.0;
  std::vector<KeyframeTrail> trails;          // one per block (one total for per-frame)
  std::vector<int> selected;                  // t_i per frame
  std::vector<std::vector<int>> fifo_sets;    // queue snapshot per frame; empty outside regions
  std::vector<size_t> coverage_popcount;      // per frame, after this iteration's update
};

struct KeyframePlan {
  int frame_count = 0;
  size_t vertex_count = 0;
  SelectionConfig config;
  SelectionMethod method = SelectionMethod::Dp;
  BlockPartition blocks;
  std::vector<IterationRecord> iterations;
  std::vector<std::vector<int>> keyframes;  // final K_i, sorted, contains i

  void validate() const;
};

// K iterations of energy-matrix construction, per-block path search, FIFO
// boundary smoothing, and keyframe-set updates; finally folds in the current
// frame's denoise neighbors (clipped to its block).
KeyframePlan select_keyframes(const std::vector<Pose>& poses,
                              const std::vector<BitVec>& visibility,
                              const SelectionConfig& scfg, const EnergyConfig& ecfg,
                              SelectionMethod method = SelectionMethod::Dp);

}  // namespace pf
