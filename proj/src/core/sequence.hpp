#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "body.hpp"
#include "fusion.hpp"

namespace pf {

// Skeleton JSON (schema owned by the CLI layer).
Skeleton skeleton_from_json_file(const std::string& path);
void skeleton_to_json_file(const Skeleton& s, double tessellation_voxel, const std::string& path);
double skeleton_tessellation_voxel(const std::string& path);  // default when absent

Pose pose_from_json_file(const std::string& path, const Skeleton& s);
void pose_to_json_file(const Pose& p, const std::string& path);

struct SequenceManifest {
  int frame_count = 0;
  std::string skeleton_path;  // relative to the manifest directory
  std::vector<Camera> cameras;

  struct FrameEntry {
    int index = 0;  // dense 1..n on disk
    std::string pose_path;
    std::string camera_id;
    std::string depth_path;
    std::map<std::string, std::string> gt_depths;  // gt camera id -> path
  };
  std::vector<FrameEntry> frames;
  std::filesystem::path base_dir;

  void validate() const;
  const Camera& camera_by_id(const std::string& id) const;
};

SequenceManifest manifest_from_json_file(const std::string& path);
void manifest_to_json_file(const SequenceManifest& m, const std::string& path);

// Loaded sequence: body, poses (normalized at ingest), cameras, cached depth.
class Sequence : public FrameSource {
 public:
  explicit Sequence(const std::string& manifest_path);

  int frame_count() const override { return manifest_.frame_count; }
  const Pose& pose(int frame) override { return poses_[frame]; }
  const Camera& camera(int frame) override;
  const DepthImage* depth(int frame) override;

  const Body& body() const { return *body_; }
  const SequenceManifest& manifest() const { return manifest_; }
  // Ground-truth cameras referenced by gt_depths entries, resolved per frame.
  std::vector<std::pair<Camera, std::string>> gt_depth_views(int frame) const;

 private:
  SequenceManifest manifest_;
  std::unique_ptr<Body> body_;
  std::vector<Pose> poses_;
  std::map<int, DepthImage> depth_cache_;
};

// Piecewise-linear per-frame parameter curves plus named presets.
struct MotionScript {
  struct Curve {
    std::string target;                        // "root_rotation", "root_translation", "joint:<name>"
    std::vector<std::array<double, 4>> keys;   // (frame, x, y, z), frame 1-based
  };
  int frames = 0;
  std::string preset;  // "", "static", "turnaround180", "armtouch"
  std::vector<Curve> curves;

  void validate() const;
};

MotionScript motion_script_from_json_file(const std::string& path);

// Pose for a 0-based frame index; preset curves first, explicit curves on top.
Pose script_pose(const MotionScript& script, const Skeleton& skeleton, int frame);

struct CameraSpec {
  int width = 320;
  int height = 288;
  double fx = 280.0;
  double fy = 280.0;
  double distance = 2.4;
  // Slightly elevated by default; a straight-on camera never sees the
  // upward-facing surfaces on any frame of a turn.
  double eye_height = 1.4;
  double target_height = 0.8;
  int gt_views = 4;  // extra calibrated views for ground truth; 0 disables
};

CameraSpec camera_spec_from_json_file(const std::string& path);

// Writes skeleton, per-frame poses and rendered depth (plus ground-truth
// multi-view depth when requested) and the manifest; returns the manifest
// path.
std::string generate_sequence(const MotionScript& script, const CameraSpec& cams,
                              const std::string& out_dir);

}  // namespace pf
