#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "selector.hpp"
#include "sequence.hpp"

namespace pf {

void plan_to_json_file(const KeyframePlan& plan, const std::string& path);
KeyframePlan plan_from_json_file(const std::string& path);

// Synthetic sequence generation (poses, depth, optional multi-view ground
// truth, manifest). Returns the manifest path.
std::string run_gen(const std::string& script_path, const std::string& camera_spec_path,
                    const std::string& out_dir);

struct SelectOutputs {
  KeyframePlan plan;
  std::string plan_path;
  // Per-iteration trail cost totals (over blocks), for the emitted summary.
  std::vector<double> iteration_costs;
};

// Runs keyframe selection and writes plan.json, trails.csv, energy matrix
// CSV/PGM dumps, and summary.json into out_dir.
SelectOutputs run_select(Sequence& sequence, const PipelineConfig& cfg, SelectionMethod method,
                         const std::string& out_dir);

struct FuseOutputs {
  std::vector<int> fused_frames;     // 0-based
  std::vector<int> failed_frames;    // 0-based
  std::vector<int> collision_fixes;  // frames where handling activated
};

// Fuses the requested frames (0-based; empty = all), writing PLY/OBJ meshes
// and PFVO volumes; per-keyframe weight volumes too when dump_intermediate.
// Frames run in parallel up to `jobs`.
FuseOutputs run_fuse(Sequence& sequence, const KeyframePlan& plan, const PipelineConfig& cfg,
                     std::vector<int> frames, int jobs, bool dump_intermediate,
                     const std::string& out_dir);

struct EvalRow {
  int frame = 0;  // 1-based; 0 is the per-label summary row
  std::string label;
  DistanceStats stats;
};

// Mesh-vs-ground-truth distances per frame and label; ground truth comes from
// the manifest's multi-view depth when present, else from the posed proxy
// surface. Missing meshes are skipped and reported.
std::vector<EvalRow> run_eval(Sequence& sequence,
                              const std::vector<std::pair<std::string, std::string>>& mesh_dirs,
                              const std::string& out_csv, std::vector<std::string>* missing);

}  // namespace pf
