#include "sequence.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>

#include "error.hpp"
#include "log.hpp"

namespace pf {

using nlohmann::json;

namespace {

json load_json(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), Status::Io, "cannot open: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    fail(Status::Format, "%s: %s", path.c_str(), e.what());
  }
  return j;
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), Status::Io, "cannot open for writing: " + path);
  out << j.dump(2) << "\n";
  require(out.good(), Status::Io, "short write: " + path);
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* what) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (key == a) known = true;
    if (!known) fail(Status::Format, "unknown key '%s' in %s", key.c_str(), what);
  }
}

Vec3 vec3_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) fail(Status::Format, "%s must be a 3-array", what);
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json vec3_to(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

void check_version(const json& j, const char* what) {
  if (j.contains("format_version") && j.at("format_version").get<int>() != 1)
    fail(Status::Format, "unsupported format_version in %s", what);
}

}  // namespace

Skeleton skeleton_from_json_file(const std::string& path) {
  json j = load_json(path);
  check_keys(j, {"format_version", "joints", "bones", "tessellation"}, "skeleton");
  check_version(j, "skeleton");
  Skeleton s;
  for (const json& joint : j.at("joints")) {
    check_keys(joint, {"name", "parent", "offset"}, "skeleton joint");
    Joint out;
    out.name = joint.at("name").get<std::string>();
    out.parent = joint.at("parent").get<int>();
    out.offset = vec3_from(joint.at("offset"), "joint offset");
    s.joints.push_back(std::move(out));
  }
  for (const json& bone : j.at("bones")) {
    check_keys(bone, {"joint", "radius", "length"}, "skeleton bone");
    s.bones.push_back({bone.at("joint").get<int>(), bone.at("radius").get<double>(),
                       bone.at("length").get<double>()});
  }
  s.validate();
  return s;
}

void skeleton_to_json_file(const Skeleton& s, double tessellation_voxel,
                           const std::string& path) {
  json joints = json::array();
  for (const Joint& joint : s.joints) {
    joints.push_back(
        {{"name", joint.name}, {"parent", joint.parent}, {"offset", vec3_to(joint.offset)}});
  }
  json bones = json::array();
  for (const Bone& bone : s.bones) {
    bones.push_back({{"joint", bone.joint}, {"radius", bone.radius}, {"length", bone.length}});
  }
  write_json(json{{"format_version", 1},
                  {"joints", joints},
                  {"bones", bones},
                  {"tessellation", {{"voxel_size", tessellation_voxel}}}},
             path);
}

double skeleton_tessellation_voxel(const std::string& path) {
  json j = load_json(path);
  if (j.contains("tessellation")) {
    check_keys(j.at("tessellation"), {"voxel_size"}, "tessellation");
    return j.at("tessellation").at("voxel_size").get<double>();
  }
  return TessellationOptions{}.voxel_size;
}

Pose pose_from_json_file(const std::string& path, const Skeleton& s) {
  json j = load_json(path);
  check_keys(j, {"format_version", "root_translation", "root_rotation", "joint_rotations"},
             "pose");
  check_version(j, "pose");
  Pose p;
  p.root_translation = vec3_from(j.at("root_translation"), "root_translation");
  p.root_rotation = vec3_from(j.at("root_rotation"), "root_rotation");
  for (const json& r : j.at("joint_rotations"))
    p.joint_rotations.push_back(vec3_from(r, "joint rotation"));
  p.validate(s);
  return p;
}

void pose_to_json_file(const Pose& p, const std::string& path) {
  json rotations = json::array();
  for (const Vec3& r : p.joint_rotations) rotations.push_back(vec3_to(r));
  write_json(json{{"format_version", 1},
                  {"root_translation", vec3_to(p.root_translation)},
                  {"root_rotation", vec3_to(p.root_rotation)},
                  {"joint_rotations", rotations}},
             path);
}

namespace {

Camera camera_from_json(const json& j) {
  check_keys(j, {"id", "fx", "fy", "cx", "cy", "width", "height", "rotation", "translation"},
             "camera");
  Camera cam;
  cam.id = j.at("id").get<std::string>();
  cam.fx = j.at("fx").get<double>();
  cam.fy = j.at("fy").get<double>();
  cam.cx = j.at("cx").get<double>();
  cam.cy = j.at("cy").get<double>();
  cam.width = j.at("width").get<int>();
  cam.height = j.at("height").get<int>();
  const json& rot = j.at("rotation");
  if (!rot.is_array() || rot.size() != 9) fail(Status::Format, "camera rotation must be 9 values");
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) cam.extrinsic.rotation(r, c) = rot[r * 3 + c].get<double>();
  cam.extrinsic.translation = vec3_from(j.at("translation"), "camera translation");
  cam.validate();
  return cam;
}

json camera_to_json(const Camera& cam) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) rot.push_back(cam.extrinsic.rotation(r, c));
  return json{{"id", cam.id},         {"fx", cam.fx},
              {"fy", cam.fy},         {"cx", cam.cx},
              {"cy", cam.cy},         {"width", cam.width},
              {"height", cam.height}, {"rotation", rot},
              {"translation", vec3_to(cam.extrinsic.translation)}};
}

}  // namespace

void SequenceManifest::validate() const {
  require(frame_count >= 1, Status::InvalidArgument, "manifest has no frames");
  require(static_cast<int>(frames.size()) == frame_count, Status::InvalidArgument,
          "manifest frame entries do not match frame_count");
  for (int i = 0; i < frame_count; ++i) {
    require(frames[i].index == i + 1, Status::InvalidArgument,
            "manifest frame indices must be dense 1..n");
    camera_by_id(frames[i].camera_id);
  }
}

const Camera& SequenceManifest::camera_by_id(const std::string& id) const {
  for (const Camera& c : cameras)
    if (c.id == id) return c;
  throw Error(Status::InvalidArgument, "manifest references unknown camera '" + id + "'");
}

SequenceManifest manifest_from_json_file(const std::string& path) {
  json j = load_json(path);
  check_keys(j, {"format_version", "frame_count", "skeleton", "cameras", "frames"}, "manifest");
  check_version(j, "manifest");
  SequenceManifest m;
  m.base_dir = std::filesystem::path(path).parent_path();
  m.frame_count = j.at("frame_count").get<int>();
  m.skeleton_path = j.at("skeleton").get<std::string>();
  for (const json& cam : j.at("cameras")) m.cameras.push_back(camera_from_json(cam));
  for (const json& frame : j.at("frames")) {
    check_keys(frame, {"index", "pose", "camera", "depth", "gt_depths"}, "manifest frame");
    SequenceManifest::FrameEntry entry;
    entry.index = frame.at("index").get<int>();
    entry.pose_path = frame.at("pose").get<std::string>();
    entry.camera_id = frame.at("camera").get<std::string>();
    entry.depth_path = frame.at("depth").get<std::string>();
    if (frame.contains("gt_depths")) {
      for (const auto& [id, p] : frame.at("gt_depths").items())
        entry.gt_depths[id] = p.get<std::string>();
    }
    m.frames.push_back(std::move(entry));
  }
  m.validate();
  return m;
}

void manifest_to_json_file(const SequenceManifest& m, const std::string& path) {
  json cams = json::array();
  for (const Camera& c : m.cameras) cams.push_back(camera_to_json(c));
  json frames = json::array();
  for (const auto& f : m.frames) {
    json entry{{"index", f.index},
               {"pose", f.pose_path},
               {"camera", f.camera_id},
               {"depth", f.depth_path}};
    if (!f.gt_depths.empty()) {
      json gt;
      for (const auto& [id, p] : f.gt_depths) gt[id] = p;
      entry["gt_depths"] = gt;
    }
    frames.push_back(std::move(entry));
  }
  write_json(json{{"format_version", 1},
                  {"frame_count", m.frame_count},
                  {"skeleton", m.skeleton_path},
                  {"cameras", cams},
                  {"frames", frames}},
             path);
}

Sequence::Sequence(const std::string& manifest_path)
    : manifest_(manifest_from_json_file(manifest_path)) {
  Skeleton skeleton = skeleton_from_json_file((manifest_.base_dir / manifest_.skeleton_path).string());
  TessellationOptions opts;
  opts.voxel_size =
      skeleton_tessellation_voxel((manifest_.base_dir / manifest_.skeleton_path).string());
  body_ = std::make_unique<Body>(Body::create(std::move(skeleton), opts));
  poses_.reserve(manifest_.frame_count);
  for (const auto& f : manifest_.frames) {
    Pose p = pose_from_json_file((manifest_.base_dir / f.pose_path).string(), body_->skeleton);
    poses_.push_back(p.normalized());
  }
}

const Camera& Sequence::camera(int frame) {
  return manifest_.camera_by_id(manifest_.frames[frame].camera_id);
}

const DepthImage* Sequence::depth(int frame) {
  auto it = depth_cache_.find(frame);
  if (it != depth_cache_.end()) return &it->second;
  const std::string& rel = manifest_.frames[frame].depth_path;
  if (rel.empty()) return nullptr;
  DepthImage img = load_pfdm((manifest_.base_dir / rel).string());
  return &depth_cache_.emplace(frame, std::move(img)).first->second;
}

std::vector<std::pair<Camera, std::string>> Sequence::gt_depth_views(int frame) const {
  std::vector<std::pair<Camera, std::string>> out;
  for (const auto& [id, rel] : manifest_.frames[frame].gt_depths) {
    out.emplace_back(manifest_.camera_by_id(id), (manifest_.base_dir / rel).string());
  }
  return out;
}

void MotionScript::validate() const {
  require(frames >= 1, Status::InvalidArgument, "motion script needs at least 1 frame");
  require(preset.empty() || preset == "static" || preset == "turnaround180" ||
              preset == "armtouch",
          Status::InvalidArgument, "unknown motion preset '" + preset + "'");
  for (const Curve& c : curves) {
    require(!c.keys.empty(), Status::InvalidArgument, "motion curve has no keys");
    for (size_t k = 1; k < c.keys.size(); ++k)
      require(c.keys[k][0] > c.keys[k - 1][0], Status::InvalidArgument,
              "motion curve keys must be strictly increasing in frame");
  }
}

MotionScript motion_script_from_json_file(const std::string& path) {
  json j = load_json(path);
  check_keys(j, {"format_version", "frames", "preset", "curves"}, "motion script");
  check_version(j, "motion script");
  MotionScript script;
  try {
    script.frames = j.at("frames").get<int>();
    if (j.contains("preset")) script.preset = j.at("preset").get<std::string>();
    if (j.contains("curves")) {
      for (const json& c : j.at("curves")) {
        check_keys(c, {"target", "keys"}, "motion curve");
        MotionScript::Curve curve;
        curve.target = c.at("target").get<std::string>();
        for (const json& k : c.at("keys")) {
          if (!k.is_array() || k.size() != 4)
            fail(Status::Format, "curve keys must be [frame, x, y, z]");
          curve.keys.push_back({k[0].get<double>(), k[1].get<double>(), k[2].get<double>(),
                                k[3].get<double>()});
        }
        script.curves.push_back(std::move(curve));
      }
    }
  } catch (const json::exception& e) {
    fail(Status::Format, "%s: %s", path.c_str(), e.what());
  }
  script.validate();
  return script;
}

namespace {

Vec3 curve_value(const MotionScript::Curve& c, double frame) {
  const auto& keys = c.keys;
  if (frame <= keys.front()[0]) return Vec3(keys.front()[1], keys.front()[2], keys.front()[3]);
  if (frame >= keys.back()[0]) return Vec3(keys.back()[1], keys.back()[2], keys.back()[3]);
  for (size_t k = 1; k < keys.size(); ++k) {
    if (frame <= keys[k][0]) {
      double t = (frame - keys[k - 1][0]) / (keys[k][0] - keys[k - 1][0]);
      Vec3 a(keys[k - 1][1], keys[k - 1][2], keys[k - 1][3]);
      Vec3 b(keys[k][1], keys[k][2], keys[k][3]);
      return a + t * (b - a);
    }
  }
  return Vec3(keys.back()[1], keys.back()[2], keys.back()[3]);
}

int joint_index_for(const std::string& spec, const Skeleton& s) {
  std::string name = spec.substr(6);  // past "joint:"
  for (size_t j = 0; j < s.joints.size(); ++j)
    if (s.joints[j].name == name) return static_cast<int>(j);
  char* end = nullptr;
  long idx = std::strtol(name.c_str(), &end, 10);
  if (end && *end == '\0' && idx >= 0 && idx < static_cast<long>(s.joint_count()))
    return static_cast<int>(idx);
  throw Error(Status::InvalidArgument, "motion curve targets unknown joint '" + name + "'");
}

std::vector<MotionScript::Curve> preset_curves(const MotionScript& script) {
  const double n = script.frames;
  std::vector<MotionScript::Curve> out;
  if (script.preset == "turnaround180") {
    // Linear yaw through pi*f/n: exactly pi/2 at frame n/2, pi at frame n.
    out.push_back({"root_rotation", {{1.0, 0.0, M_PI / n, 0.0}, {n, 0.0, M_PI, 0.0}}});
    if (script.frames == 1) out.back().keys.resize(1);
  } else if (script.preset == "armtouch") {
    // Swing the left arm against the torso mid-sequence, then release.
    out.push_back({"joint:l_shoulder",
                   {{1.0, 0.0, 0.0, 0.0},
                    {std::max(2.0, 0.35 * n), 0.0, 0.0, -0.85},
                    {std::max(3.0, 0.65 * n), 0.0, 0.0, -0.85},
                    {n, 0.0, 0.0, 0.0}}});
    if (script.frames < 4) out.clear();
  }
  return out;
}

}  // namespace

Pose script_pose(const MotionScript& script, const Skeleton& skeleton, int frame) {
  Pose pose = Pose::rest(skeleton);
  double f = frame + 1.0;  // curves use 1-based frames
  auto apply = [&](const MotionScript::Curve& c) {
    Vec3 v = curve_value(c, f);
    if (c.target == "root_rotation")
      pose.root_rotation = v;
    else if (c.target == "root_translation")
      pose.root_translation = v;
    else if (c.target.rfind("joint:", 0) == 0)
      pose.joint_rotations[joint_index_for(c.target, skeleton)] = v;
    else
      throw Error(Status::InvalidArgument, "unknown motion curve target '" + c.target + "'");
  };
  for (const auto& c : preset_curves(script)) apply(c);
  for (const auto& c : script.curves) apply(c);
  return pose;
}

CameraSpec camera_spec_from_json_file(const std::string& path) {
  json j = load_json(path);
  check_keys(j,
             {"format_version", "image_width", "image_height", "fx", "fy", "distance",
              "eye_height", "target_height", "gt_views"},
             "camera spec");
  check_version(j, "camera spec");
  CameraSpec spec;
  try {
    if (j.contains("image_width")) spec.width = j.at("image_width").get<int>();
    if (j.contains("image_height")) spec.height = j.at("image_height").get<int>();
    if (j.contains("fx")) spec.fx = j.at("fx").get<double>();
    if (j.contains("fy")) spec.fy = j.at("fy").get<double>();
    if (j.contains("distance")) spec.distance = j.at("distance").get<double>();
    if (j.contains("eye_height")) spec.eye_height = j.at("eye_height").get<double>();
    if (j.contains("target_height")) spec.target_height = j.at("target_height").get<double>();
    if (j.contains("gt_views")) spec.gt_views = j.at("gt_views").get<int>();
  } catch (const json::exception& e) {
    fail(Status::Format, "%s: %s", path.c_str(), e.what());
  }
  return spec;
}

std::string generate_sequence(const MotionScript& script, const CameraSpec& cams,
                              const std::string& out_dir) {
  script.validate();
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "poses");
  fs::create_directories(fs::path(out_dir) / "depth");
  if (cams.gt_views > 0) fs::create_directories(fs::path(out_dir) / "gt");

  Skeleton skeleton = default_skeleton();
  skeleton_to_json_file(skeleton, TessellationOptions{}.voxel_size,
                        (fs::path(out_dir) / "skeleton.json").string());

  SequenceManifest manifest;
  manifest.frame_count = script.frames;
  manifest.skeleton_path = "skeleton.json";
  manifest.base_dir = out_dir;

  auto make_camera = [&](const std::string& id, double yaw) {
    Vec3 eye(cams.distance * std::sin(yaw), cams.eye_height, cams.distance * std::cos(yaw));
    Camera cam = Camera::look_at(eye, Vec3(0, cams.target_height, 0), Vec3(0, 1, 0), cams.fx,
                                 cams.fy, cams.width, cams.height);
    cam.id = id;
    return cam;
  };
  manifest.cameras.push_back(make_camera("cam0", 0.0));
  for (int g = 0; g < cams.gt_views; ++g)
    manifest.cameras.push_back(make_camera("gt" + std::to_string(g),
                                           2.0 * M_PI * g / cams.gt_views));

  char name[64];
  for (int i = 0; i < script.frames; ++i) {
    Pose pose = script_pose(script, skeleton, i);
    SequenceManifest::FrameEntry entry;
    entry.index = i + 1;
    entry.camera_id = "cam0";

    std::snprintf(name, sizeof(name), "poses/frame_%04d.json", i + 1);
    entry.pose_path = name;
    pose_to_json_file(pose, (fs::path(out_dir) / name).string());

    std::snprintf(name, sizeof(name), "depth/frame_%04d.pfdm", i + 1);
    entry.depth_path = name;
    save_pfdm(render_depth(skeleton, pose, manifest.cameras[0]),
              (fs::path(out_dir) / name).string());

    for (int g = 0; g < cams.gt_views; ++g) {
      std::snprintf(name, sizeof(name), "gt/gt%d_frame_%04d.pfdm", g, i + 1);
      entry.gt_depths["gt" + std::to_string(g)] = name;
      save_pfdm(render_depth(skeleton, pose, manifest.cameras[1 + g]),
                (fs::path(out_dir) / name).string());
    }
    manifest.frames.push_back(std::move(entry));
  }

  std::string manifest_path = (fs::path(out_dir) / "manifest.json").string();
  manifest_to_json_file(manifest, manifest_path);
  PF_LOG_INFO("stage=gen frames=%d preset=%s gt_views=%d out=%s", script.frames,
              script.preset.empty() ? "none" : script.preset.c_str(), cams.gt_views,
              out_dir.c_str());
  return manifest_path;
}

}  // namespace pf
