#include "posefuse.h"

#include <cstring>
#include <string>

#include "core/body.hpp"
#include "core/config.hpp"
#include "core/error.hpp"
#include "core/fusion.hpp"
#include "core/pipeline.hpp"
#include "core/sequence.hpp"

namespace {

thread_local std::string g_last_error;

static_assert(static_cast<int>(pf::Status::Ok) == PF_OK);
static_assert(static_cast<int>(pf::Status::InvalidArgument) == PF_ERROR_INVALID_ARGUMENT);
static_assert(static_cast<int>(pf::Status::Io) == PF_ERROR_IO);
static_assert(static_cast<int>(pf::Status::Format) == PF_ERROR_FORMAT);
static_assert(static_cast<int>(pf::Status::Infeasible) == PF_ERROR_INFEASIBLE);
static_assert(static_cast<int>(pf::Status::Bounds) == PF_ERROR_BOUNDS);
static_assert(static_cast<int>(pf::Status::Runtime) == PF_ERROR_RUNTIME);

// Runs fn, translating exceptions into status codes + the thread-local
// message.
template <typename Fn>
pf_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return PF_OK;
  } catch (const pf::Error& e) {
    g_last_error = e.what();
    return static_cast<pf_status>(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PF_ERROR_RUNTIME;
  } catch (...) {
    g_last_error = "unknown error";
    return PF_ERROR_RUNTIME;
  }
}

pf_status invalid(const char* msg) {
  g_last_error = msg;
  return PF_ERROR_INVALID_ARGUMENT;
}

}  // namespace

struct pf_body {
  pf::Body body;
};
struct pf_config {
  pf::PipelineConfig config;
};
struct pf_sequence {
  explicit pf_sequence(const char* path) : sequence(path) {}
  pf::Sequence sequence;
};
struct pf_plan {
  pf::KeyframePlan plan;
};
struct pf_volume {
  pf::OccupancyGrid grid;
};
struct pf_mesh {
  pf::TriMesh mesh;
};

extern "C" {

const char* pf_status_name(pf_status status) {
  return pf::status_name(static_cast<pf::Status>(status));
}

const char* pf_last_error(void) { return g_last_error.c_str(); }

const char* pf_version(void) { return "0.1.0"; }

/* config */

pf_status pf_config_default(pf_config** out) {
  if (!out) return invalid("out is null");
  return guarded([&] { *out = new pf_config(); });
}

pf_status pf_config_load(const char* path, pf_config** out) {
  if (!path || !out) return invalid("path/out is null");
  return guarded([&] { *out = new pf_config{pf::config_from_json_file(path)}; });
}

pf_status pf_config_parse(const char* json_text, pf_config** out) {
  if (!json_text || !out) return invalid("json_text/out is null");
  return guarded([&] { *out = new pf_config{pf::config_from_json_text(json_text)}; });
}

pf_status pf_config_to_json(const pf_config* config, char** out_json) {
  if (!config || !out_json) return invalid("config/out_json is null");
  return guarded([&] {
    std::string text = pf::config_to_json_text(config->config);
    *out_json = static_cast<char*>(std::malloc(text.size() + 1));
    std::memcpy(*out_json, text.c_str(), text.size() + 1);
  });
}

void pf_config_destroy(pf_config* config) { delete config; }

void pf_string_free(char* text) { std::free(text); }

/* body */

pf_status pf_body_default(pf_body** out) {
  if (!out) return invalid("out is null");
  return guarded([&] { *out = new pf_body{pf::Body::create(pf::default_skeleton())}; });
}

pf_status pf_body_load(const char* skeleton_json_path, pf_body** out) {
  if (!skeleton_json_path || !out) return invalid("path/out is null");
  return guarded([&] {
    pf::Skeleton s = pf::skeleton_from_json_file(skeleton_json_path);
    pf::TessellationOptions opts;
    opts.voxel_size = pf::skeleton_tessellation_voxel(skeleton_json_path);
    *out = new pf_body{pf::Body::create(std::move(s), opts)};
  });
}

void pf_body_destroy(pf_body* body) { delete body; }

int32_t pf_body_joint_count(const pf_body* body) {
  return body ? static_cast<int32_t>(body->body.skeleton.joint_count()) : -1;
}

int32_t pf_body_vertex_count(const pf_body* body) {
  return body ? static_cast<int32_t>(body->body.vertex_count()) : -1;
}

pf_status pf_body_skin(const pf_body* body, const double* pose, size_t pose_len, double* out_xyz,
                       size_t out_len) {
  if (!body || !pose || !out_xyz) return invalid("body/pose/out is null");
  return guarded([&] {
    size_t joints = body->body.skeleton.joint_count();
    pf::require(pose_len == 6 + 3 * joints, pf::Status::InvalidArgument,
                "pose length must be 6 + 3*joint_count");
    pf::require(out_len >= 3 * body->body.vertex_count(), pf::Status::InvalidArgument,
                "output buffer too small");
    pf::Pose p;
    p.root_translation = pf::Vec3(pose[0], pose[1], pose[2]);
    p.root_rotation = pf::Vec3(pose[3], pose[4], pose[5]);
    for (size_t j = 0; j < joints; ++j)
      p.joint_rotations.push_back(
          pf::Vec3(pose[6 + 3 * j], pose[6 + 3 * j + 1], pose[6 + 3 * j + 2]));
    std::vector<pf::Vec3> posed = pf::skin_pose(body->body, p);
    for (size_t v = 0; v < posed.size(); ++v) {
      out_xyz[3 * v] = posed[v].x();
      out_xyz[3 * v + 1] = posed[v].y();
      out_xyz[3 * v + 2] = posed[v].z();
    }
  });
}

/* sequence */

pf_status pf_sequence_open(const char* manifest_path, pf_sequence** out) {
  if (!manifest_path || !out) return invalid("path/out is null");
  return guarded([&] { *out = new pf_sequence(manifest_path); });
}

int32_t pf_sequence_frame_count(const pf_sequence* sequence) {
  return sequence ? sequence->sequence.frame_count() : -1;
}

void pf_sequence_destroy(pf_sequence* sequence) { delete sequence; }

/* plans */

pf_status pf_plan_load(const char* path, pf_plan** out) {
  if (!path || !out) return invalid("path/out is null");
  return guarded([&] { *out = new pf_plan{pf::plan_from_json_file(path)}; });
}

pf_status pf_plan_save(const pf_plan* plan, const char* path) {
  if (!plan || !path) return invalid("plan/path is null");
  return guarded([&] { pf::plan_to_json_file(plan->plan, path); });
}

int32_t pf_plan_frame_count(const pf_plan* plan) { return plan ? plan->plan.frame_count : -1; }

int32_t pf_plan_keyframes(const pf_plan* plan, int32_t frame, int32_t* out, size_t capacity) {
  if (!plan || frame < 1 || frame > plan->plan.frame_count) return -1;
  const auto& set = plan->plan.keyframes[frame - 1];
  if (out) {
    if (capacity < set.size()) return -1;
    for (size_t i = 0; i < set.size(); ++i) out[i] = set[i] + 1;
  }
  return static_cast<int32_t>(set.size());
}

void pf_plan_destroy(pf_plan* plan) { delete plan; }

/* pipeline stages */

pf_status pf_run_gen(const char* script_path, const char* camera_spec_path, const char* out_dir) {
  if (!script_path || !out_dir) return invalid("script_path/out_dir is null");
  return guarded(
      [&] { pf::run_gen(script_path, camera_spec_path ? camera_spec_path : "", out_dir); });
}

pf_status pf_run_select(const char* manifest_path, const pf_config* config, const char* method,
                        const char* out_dir) {
  if (!manifest_path || !config || !method || !out_dir)
    return invalid("manifest/config/method/out_dir is null");
  return guarded([&] {
    pf::Sequence sequence(manifest_path);
    pf::run_select(sequence, config->config, pf::selection_method_from_name(method), out_dir);
  });
}

pf_status pf_select(pf_sequence* sequence, const pf_config* config, const char* method,
                    pf_plan** out) {
  if (!sequence || !config || !method || !out) return invalid("sequence/config/method/out is null");
  return guarded([&] {
    pf::Sequence& seq = sequence->sequence;
    const pf::Body& body = seq.body();
    config->config.validate(body.skeleton.joint_count());
    std::vector<pf::Pose> poses;
    std::vector<pf::BitVec> visibility;
    for (int i = 0; i < seq.frame_count(); ++i) {
      poses.push_back(seq.pose(i));
      const pf::DepthImage* depth = seq.depth(i);
      pf::require(depth != nullptr, pf::Status::InvalidArgument,
                  "frame " + std::to_string(i + 1) + " has no depth image");
      visibility.push_back(pf::compute_visibility(body, poses[i], seq.camera(i), *depth));
    }
    *out = new pf_plan{pf::select_keyframes(poses, visibility, config->config.selection,
                                            config->config.energy,
                                            pf::selection_method_from_name(method))};
  });
}

pf_status pf_run_fuse(const char* manifest_path, const char* plan_path, const pf_config* config,
                      const int32_t* frames, size_t frame_count, int32_t jobs,
                      int32_t dump_intermediate, const char* out_dir, int32_t* failed_out) {
  if (!manifest_path || !plan_path || !config || !out_dir)
    return invalid("manifest/plan/config/out_dir is null");
  return guarded([&] {
    pf::Sequence sequence(manifest_path);
    pf::KeyframePlan plan = pf::plan_from_json_file(plan_path);
    std::vector<int> frame_list;
    for (size_t i = 0; i < frame_count; ++i) {
      if (frames) frame_list.push_back(frames[i] - 1);
    }
    pf::FuseOutputs outputs = pf::run_fuse(sequence, plan, config->config, frame_list, jobs,
                                           dump_intermediate != 0, out_dir);
    if (failed_out) *failed_out = static_cast<int32_t>(outputs.failed_frames.size());
  });
}

pf_status pf_fuse(pf_sequence* sequence, const pf_plan* plan, const pf_config* config,
                  int32_t frame, pf_volume** volume_out, pf_mesh** mesh_out) {
  if (!sequence || !plan || !config) return invalid("sequence/plan/config is null");
  if (frame < 1 || frame > plan->plan.frame_count) return invalid("frame out of range");
  return guarded([&] {
    pf::Sequence& seq = sequence->sequence;
    const pf::Body& body = seq.body();
    config->config.validate(body.skeleton.joint_count());
    std::unique_ptr<pf::OccupancyProvider> provider =
        pf::make_provider(config->config.provider, body.skeleton);
    pf::FuseResult result = pf::fuse_frame(body, seq, plan->plan.keyframes[frame - 1], frame - 1,
                                           *provider, config->config.fusion);
    if (mesh_out)
      *mesh_out = new pf_mesh{pf::extract_mesh(result.volume, config->config.fusion.iso_level)};
    if (volume_out) *volume_out = new pf_volume{pf::volume_to_grid(result.volume)};
  });
}

pf_status pf_run_eval(const char* manifest_path, const char* const* mesh_dirs,
                      const char* const* labels, size_t dir_count, const char* out_csv) {
  if (!manifest_path || !mesh_dirs || dir_count == 0 || !out_csv)
    return invalid("manifest/mesh_dirs/out_csv is null or empty");
  return guarded([&] {
    pf::Sequence sequence(manifest_path);
    std::vector<std::pair<std::string, std::string>> dirs;
    for (size_t i = 0; i < dir_count; ++i) {
      dirs.emplace_back(labels && labels[i] ? labels[i] : mesh_dirs[i], mesh_dirs[i]);
    }
    std::vector<std::string> missing;
    pf::run_eval(sequence, dirs, out_csv, &missing);
    pf::require(missing.empty(), pf::Status::Runtime,
                "evaluation skipped inputs: " + (missing.empty() ? "" : missing[0]));
  });
}

/* volumes */

pf_status pf_volume_load(const char* path, pf_volume** out) {
  if (!path || !out) return invalid("path/out is null");
  return guarded([&] { *out = new pf_volume{pf::load_pfvo(path)}; });
}

pf_status pf_volume_save(const pf_volume* volume, const char* path) {
  if (!volume || !path) return invalid("volume/path is null");
  return guarded([&] { pf::save_pfvo(volume->grid, path); });
}

pf_status pf_volume_dims(const pf_volume* volume, int32_t out_dims[3]) {
  if (!volume || !out_dims) return invalid("volume/out_dims is null");
  out_dims[0] = volume->grid.dims.x();
  out_dims[1] = volume->grid.dims.y();
  out_dims[2] = volume->grid.dims.z();
  return PF_OK;
}

pf_status pf_volume_sample(const pf_volume* volume, const double* xyz, size_t count,
                           double* out) {
  if (!volume || !xyz || !out) return invalid("volume/xyz/out is null");
  return guarded([&] {
    for (size_t i = 0; i < count; ++i)
      out[i] = volume->grid.sample(pf::Vec3(xyz[3 * i], xyz[3 * i + 1], xyz[3 * i + 2]));
  });
}

void pf_volume_destroy(pf_volume* volume) { delete volume; }

/* meshes */

pf_status pf_mesh_load_ply(const char* path, pf_mesh** out) {
  if (!path || !out) return invalid("path/out is null");
  return guarded([&] { *out = new pf_mesh{pf::load_ply(path)}; });
}

pf_status pf_mesh_save_ply(const pf_mesh* mesh, const char* path) {
  if (!mesh || !path) return invalid("mesh/path is null");
  return guarded([&] { pf::save_ply(mesh->mesh, path); });
}

pf_status pf_mesh_save_obj(const pf_mesh* mesh, const char* path) {
  if (!mesh || !path) return invalid("mesh/path is null");
  return guarded([&] { pf::save_obj(mesh->mesh, path); });
}

int32_t pf_mesh_vertex_count(const pf_mesh* mesh) {
  return mesh ? static_cast<int32_t>(mesh->mesh.vertices.size()) : -1;
}

int32_t pf_mesh_triangle_count(const pf_mesh* mesh) {
  return mesh ? static_cast<int32_t>(mesh->mesh.triangles.size()) : -1;
}

pf_status pf_mesh_distance(const pf_mesh* a, const pf_mesh* b, double out_stats[3]) {
  if (!a || !b || !out_stats) return invalid("mesh/out is null");
  return guarded([&] {
    pf::DistanceStats stats = pf::mesh_distance(a->mesh, b->mesh);
    out_stats[0] = stats.mean;
    out_stats[1] = stats.max;
    out_stats[2] = stats.rms;
  });
}

void pf_mesh_destroy(pf_mesh* mesh) { delete mesh; }

}  // extern "C"
