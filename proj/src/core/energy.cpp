#include "energy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "error.hpp"

namespace pf {

void EnergyConfig::validate(size_t joint_count) const {
  require(joint_weights.empty() || joint_weights.size() == joint_count, Status::InvalidArgument,
          "joint weight count does not match skeleton");
  for (double w : joint_weights)
    require(w >= 0.0, Status::InvalidArgument, "joint weights must be non-negative");
  for (int j : excluded_joints)
    require(j >= 0 && j < static_cast<int>(joint_count), Status::InvalidArgument,
            "excluded joint index out of range");
  bool any = false;
  for (size_t j = 0; j < joint_count && !any; ++j)
    any = !excluded(static_cast<int>(j)) && weight(static_cast<int>(j)) > 0.0;
  require(any, Status::InvalidArgument, "at least one non-excluded joint needs positive weight");
}

bool EnergyConfig::excluded(int joint) const {
  return std::find(excluded_joints.begin(), excluded_joints.end(), joint) !=
         excluded_joints.end();
}

void KeyframeSetState::add(int frame, const BitVec& f) {
  auto it = std::lower_bound(selected.begin(), selected.end(), frame);
  if (it == selected.end() || *it != frame) selected.insert(it, frame);
  coverage.or_with(f);
}

bool KeyframeSetState::contains(int frame) const {
  return std::binary_search(selected.begin(), selected.end(), frame);
}

double pose_energy(const Pose& a, const Pose& b, const EnergyConfig& cfg) {
  require(a.joint_rotations.size() == b.joint_rotations.size(), Status::InvalidArgument,
          "pose_energy: poses have different joint counts");
  cfg.validate(a.joint_rotations.size());
  double sum = 0.0;
  for (size_t k = 0; k < a.joint_rotations.size(); ++k) {
    int joint = static_cast<int>(k);
    if (cfg.excluded(joint)) continue;
    double sq = (a.joint_rotations[k] - b.joint_rotations[k]).squaredNorm();
    sum += cfg.weight(joint) * (cfg.metric == PoseMetric::SquaredL2 ? sq : std::sqrt(sq));
  }
  return sum;
}

double visibility_energy(const KeyframeSetState& state, const BitVec& candidate) {
  require(state.coverage.size() == candidate.size(), Status::InvalidArgument,
          "visibility_energy: vector length mismatch");
  size_t uncovered = state.coverage.zero_count();
  if (uncovered == 0) return 0.0;
  return static_cast<double>(state.coverage.andnot_popcount(candidate)) /
         static_cast<double>(uncovered);
}

std::vector<double> pose_energy_matrix(const std::vector<Pose>& poses, const EnergyConfig& cfg) {
  const int n = static_cast<int>(poses.size());
  std::vector<double> out(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double e = pose_energy(poses[i], poses[j], cfg);
      out[static_cast<size_t>(i) * n + j] = e;
      out[static_cast<size_t>(j) * n + i] = e;
    }
  }
  return out;
}

EnergyMatrix build_energy_matrix(const std::vector<double>& pose_part,
                                 const std::vector<BitVec>& visibility,
                                 const std::vector<KeyframeSetState>& states, double lambda) {
  const int n = static_cast<int>(visibility.size());
  require(n >= 2, Status::InvalidArgument, "energy matrix needs at least 2 frames");
  require(states.size() == visibility.size(), Status::InvalidArgument,
          "state count does not match frame count");
  require(pose_part.size() == static_cast<size_t>(n) * n, Status::InvalidArgument,
          "pose energy matrix size mismatch");
  EnergyMatrix m;
  m.n = n;
  m.cost.resize(static_cast<size_t>(n) * n);
  m.visibility_part.resize(static_cast<size_t>(n) * n);
  const double inf = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double evis = visibility_energy(states[i], visibility[j]);
      m.ev(i, j) = 1.0 - evis;
      m.at(i, j) = i == j ? inf : pose_part[static_cast<size_t>(i) * n + j] - lambda * evis;
    }
  }
  return m;
}

EnergyMatrix build_energy_matrix(const std::vector<Pose>& poses,
                                 const std::vector<BitVec>& visibility,
                                 const std::vector<KeyframeSetState>& states,
                                 const EnergyConfig& cfg) {
  return build_energy_matrix(pose_energy_matrix(poses, cfg), visibility, states,
                             cfg.lambda_visibility);
}

void save_matrix_csv(const std::vector<double>& values, int n, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  require(f != nullptr, Status::Io, "cannot open for writing: " + path);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double v = values[static_cast<size_t>(i) * n + j];
      if (std::isinf(v))
        std::fprintf(f, "inf");
      else
        std::fprintf(f, "%.9g", v);
      std::fputc(j + 1 < n ? ',' : '\n', f);
    }
  }
  std::fclose(f);
}

void save_matrix_pgm(const std::vector<double>& values, int n, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  require(f != nullptr, Status::Io, "cannot open for writing: " + path);
  std::fprintf(f, "P5\n%d %d\n255\n", n, n);
  for (size_t i = 0; i < values.size(); ++i) {
    double v = std::clamp(values[i], 0.0, 1.0);
    std::fputc(static_cast<int>(std::lround(v * 255.0)), f);
  }
  std::fclose(f);
}

}  // namespace pf
