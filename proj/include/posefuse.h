/* posefuse: pose-guided keyframe selection and implicit surface fusion on an
 * articulated capsule body, behind a C ABI.
 *
 * All functions return pf_status; on failure pf_last_error() carries a
 * thread-local message. Handles are opaque and owned by the caller via the
 * matching *_destroy call. Frame indices at this boundary are 1-based, to
 * match every on-disk format.
 */
#ifndef POSEFUSE_H
#define POSEFUSE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define PF_API __declspec(dllexport)
#else
#define PF_API __attribute__((visibility("default")))
#endif

typedef enum pf_status {
  PF_OK = 0,
  PF_ERROR_INVALID_ARGUMENT = 1,
  PF_ERROR_IO = 2,
  PF_ERROR_FORMAT = 3,
  PF_ERROR_INFEASIBLE = 4,
  PF_ERROR_BOUNDS = 5,
  PF_ERROR_RUNTIME = 6
} pf_status;

PF_API const char* pf_status_name(pf_status status);
/* Message from the most recent failing call on this thread ("" if none). */
PF_API const char* pf_last_error(void);
PF_API const char* pf_version(void);

typedef struct pf_body pf_body;
typedef struct pf_config pf_config;
typedef struct pf_sequence pf_sequence;
typedef struct pf_plan pf_plan;
typedef struct pf_volume pf_volume;
typedef struct pf_mesh pf_mesh;

/* ------------------------------------------------------------------ config */

PF_API pf_status pf_config_default(pf_config** out);
PF_API pf_status pf_config_load(const char* path, pf_config** out);
PF_API pf_status pf_config_parse(const char* json_text, pf_config** out);
/* Serialized JSON; free with pf_string_free. */
PF_API pf_status pf_config_to_json(const pf_config* config, char** out_json);
PF_API void pf_config_destroy(pf_config* config);
PF_API void pf_string_free(char* text);

/* -------------------------------------------------------------------- body */

/* The built-in 16-joint capsule humanoid. */
PF_API pf_status pf_body_default(pf_body** out);
/* From a skeleton JSON document. */
PF_API pf_status pf_body_load(const char* skeleton_json_path, pf_body** out);
PF_API void pf_body_destroy(pf_body* body);
PF_API int32_t pf_body_joint_count(const pf_body* body);
PF_API int32_t pf_body_vertex_count(const pf_body* body);

/* Pose layout: root_translation[3], root_rotation[3], then 3 axis-angle
 * components per joint (6 + 3*joint_count doubles). */
PF_API pf_status pf_body_skin(const pf_body* body, const double* pose, size_t pose_len,
                              double* out_xyz, size_t out_len);

/* ---------------------------------------------------------------- sequence */

PF_API pf_status pf_sequence_open(const char* manifest_path, pf_sequence** out);
PF_API int32_t pf_sequence_frame_count(const pf_sequence* sequence);
PF_API void pf_sequence_destroy(pf_sequence* sequence);

/* ------------------------------------------------------------------- plans */

PF_API pf_status pf_plan_load(const char* path, pf_plan** out);
PF_API pf_status pf_plan_save(const pf_plan* plan, const char* path);
PF_API int32_t pf_plan_frame_count(const pf_plan* plan);
/* Keyframe set of a frame (1-based in and out); returns the count, or -1 on
 * error. With out == NULL just returns the count. */
PF_API int32_t pf_plan_keyframes(const pf_plan* plan, int32_t frame, int32_t* out,
                                 size_t capacity);
PF_API void pf_plan_destroy(pf_plan* plan);

/* --------------------------------------------------------- pipeline stages */

/* Synthetic sequence generation. camera_spec_path may be NULL for defaults.
 * Writes poses, depth maps, optional ground-truth views, and manifest.json
 * under out_dir. */
PF_API pf_status pf_run_gen(const char* script_path, const char* camera_spec_path,
                            const char* out_dir);

/* Keyframe selection; method is "dp", "greedy" or "perframe". Writes
 * plan.json, trails.csv, energy matrix dumps, and summary.json. */
PF_API pf_status pf_run_select(const char* manifest_path, const pf_config* config,
                               const char* method, const char* out_dir);

/* Selection without touching the filesystem. */
PF_API pf_status pf_select(pf_sequence* sequence, const pf_config* config, const char* method,
                           pf_plan** out);

/* Fuse the listed frames (1-based; frames == NULL fuses all). Writes meshes/
 * and volumes/ under out_dir. failed_out (optional) receives the number of
 * frames that failed; the call itself fails only on setup errors. */
PF_API pf_status pf_run_fuse(const char* manifest_path, const char* plan_path,
                             const pf_config* config, const int32_t* frames, size_t frame_count,
                             int32_t jobs, int32_t dump_intermediate, const char* out_dir,
                             int32_t* failed_out);

/* Single-frame fusion; either output may be NULL. */
PF_API pf_status pf_fuse(pf_sequence* sequence, const pf_plan* plan, const pf_config* config,
                         int32_t frame, pf_volume** volume_out, pf_mesh** mesh_out);

/* Mesh-vs-ground-truth evaluation over one or more mesh directories; labels
 * may be NULL (directory paths are used). Writes a CSV report. */
PF_API pf_status pf_run_eval(const char* manifest_path, const char* const* mesh_dirs,
                             const char* const* labels, size_t dir_count, const char* out_csv);

/* ----------------------------------------------------------------- volumes */

PF_API pf_status pf_volume_load(const char* path, pf_volume** out);
PF_API pf_status pf_volume_save(const pf_volume* volume, const char* path);
PF_API pf_status pf_volume_dims(const pf_volume* volume, int32_t out_dims[3]);
/* Trilinear occupancy samples at `count` xyz points (0 outside the grid). */
PF_API pf_status pf_volume_sample(const pf_volume* volume, const double* xyz, size_t count,
                                  double* out);
PF_API void pf_volume_destroy(pf_volume* volume);

/* ------------------------------------------------------------------ meshes */

PF_API pf_status pf_mesh_load_ply(const char* path, pf_mesh** out);
PF_API pf_status pf_mesh_save_ply(const pf_mesh* mesh, const char* path);
PF_API pf_status pf_mesh_save_obj(const pf_mesh* mesh, const char* path);
PF_API int32_t pf_mesh_vertex_count(const pf_mesh* mesh);
PF_API int32_t pf_mesh_triangle_count(const pf_mesh* mesh);
/* Symmetric sampled surface distance: out = {mean, max, rms} in meters. */
PF_API pf_status pf_mesh_distance(const pf_mesh* a, const pf_mesh* b, double out_stats[3]);
PF_API void pf_mesh_destroy(pf_mesh* mesh);

#ifdef __cplusplus
}
#endif

#endif /* POSEFUSE_H */
