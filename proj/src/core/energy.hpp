#pragma once

#include <string>
#include <vector>

#include "bitvec.hpp"
#include "skeleton.hpp"

namespace pf {

enum class PoseMetric {
  SquaredL2,  // sum of per-joint squared vector norms (default)
  L2,         // sum of per-joint vector norms
};

struct EnergyConfig {
  std::vector<double> joint_weights;  // empty = uniform 1.0
  double lambda_visibility = 1.5;
  std::vector<int> excluded_joints;   // root rotation/translation are excluded structurally
  PoseMetric metric = PoseMetric::SquaredL2;

  void validate(size_t joint_count) const;
  bool excluded(int joint) const;
  double weight(int joint) const {
    return joint_weights.empty() ? 1.0 : joint_weights[joint];
  }
};

// Selected keyframe set of one frame with its accumulated visibility.
struct KeyframeSetState {
  std::vector<int> selected;  // sorted, always contains the frame itself
  BitVec coverage;            // element-wise OR of visibility over `selected`

  static KeyframeSetState initial(int frame, const BitVec& f) {
    return KeyframeSetState{{frame}, f};
  }
  void add(int frame, const BitVec& f);
  bool contains(int frame) const;
};

// Sum over non-excluded joints of w_k * |theta_i^k - theta_j^k|^2 on the raw
// axis-angle components; the root rigid transform never contributes.
double pose_energy(const Pose& a, const Pose& b, const EnergyConfig& cfg);

// Fraction of still-uncovered vertices the candidate newly reveals; 0 once
// coverage is complete.
double visibility_energy(const KeyframeSetState& state, const BitVec& candidate);

struct EnergyMatrix {
  int n = 0;
  std::vector<double> cost;             // E; +inf on the diagonal
  std::vector<double> visibility_part;  // E_v[i][j] = 1 - E_visibility(K_i, j)

  double at(int i, int j) const { return cost[static_cast<size_t>(i) * n + j]; }
  double& at(int i, int j) { return cost[static_cast<size_t>(i) * n + j]; }
  double ev(int i, int j) const { return visibility_part[static_cast<size_t>(i) * n + j]; }
  double& ev(int i, int j) { return visibility_part[static_cast<size_t>(i) * n + j]; }
};

// Pairwise pose energies (symmetric, zero diagonal); cached across iterations
// since poses never change.
std::vector<double> pose_energy_matrix(const std::vector<Pose>& poses, const EnergyConfig& cfg);

EnergyMatrix build_energy_matrix(const std::vector<double>& pose_part,
                                 const std::vector<BitVec>& visibility,
                                 const std::vector<KeyframeSetState>& states, double lambda);

EnergyMatrix build_energy_matrix(const std::vector<Pose>& poses,
                                 const std::vector<BitVec>& visibility,
                                 const std::vector<KeyframeSetState>& states,
                                 const EnergyConfig& cfg);

// CSV dump, one row per current frame; +inf serialized as "inf".
void save_matrix_csv(const std::vector<double>& values, int n, const std::string& path);
// Grayscale PGM of an [0,1] matrix (255 = 1).
void save_matrix_pgm(const std::vector<double>& values, int n, const std::string& path);

}  // namespace pf
