#include "pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

#include "error.hpp"
#include "log.hpp"

namespace pf {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

json indices_to_json(const std::vector<int>& v) {
  json out = json::array();
  for (int i : v) out.push_back(i + 1);  // 1-based on disk
  return out;
}

std::vector<int> indices_from_json(const json& j) {
  std::vector<int> out;
  for (const auto& e : j) out.push_back(e.get<int>() - 1);
  return out;
}

std::string frame_name(const char* prefix, int frame, const char* ext) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%s_%04d.%s", prefix, frame + 1, ext);
  return buf;
}

}  // namespace

void plan_to_json_file(const KeyframePlan& plan, const std::string& path) {
  json blocks = json::array();
  for (const Block& b : plan.blocks.blocks)
    blocks.push_back(json::array({b.begin + 1, b.end}));  // 1-based inclusive

  json iterations = json::array();
  for (const IterationRecord& rec : plan.iterations) {
    json trails = json::array();
    for (const KeyframeTrail& t : rec.trails) {
      trails.push_back({{"first", t.begin + 1}, {"t", indices_to_json(t.t)},
                        {"cost", t.total_cost}});
    }
    json fifo = json::array();
    for (const auto& s : rec.fifo_sets) fifo.push_back(indices_to_json(s));
    iterations.push_back({{"lambda", rec.lambda},
                          {"selected", indices_to_json(rec.selected)},
                          {"trails", trails},
                          {"fifo_sets", fifo},
                          {"coverage", rec.coverage_popcount}});
  }

  json keyframes = json::array();
  for (const auto& k : plan.keyframes) keyframes.push_back(indices_to_json(k));

  json j{{"format_version", 1},
         {"frame_count", plan.frame_count},
         {"vertex_count", plan.vertex_count},
         {"method", selection_method_name(plan.method)},
         {"config",
          {{"iterations", plan.config.iterations},
           {"half_window", plan.config.half_window},
           {"lambda_first", plan.config.lambda_first},
           {"lambda_rest", plan.config.lambda_rest},
           {"block_threshold", plan.config.block_threshold},
           {"fifo_size", plan.config.fifo_size},
           {"denoise_neighbors", plan.config.denoise_neighbors}}},
         {"blocks", blocks},
         {"iterations", iterations},
         {"keyframes", keyframes}};

  std::ofstream out(path);
  require(out.good(), Status::Io, "cannot open for writing: " + path);
  out << j.dump(2) << "\n";
  require(out.good(), Status::Io, "short write: " + path);
}

KeyframePlan plan_from_json_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), Status::Io, "cannot open: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    fail(Status::Format, "%s: %s", path.c_str(), e.what());
  }

  KeyframePlan plan;
  try {
    if (j.at("format_version").get<int>() != 1)
      fail(Status::Format, "unsupported plan format_version");
    plan.frame_count = j.at("frame_count").get<int>();
    plan.vertex_count = j.at("vertex_count").get<size_t>();
    plan.method = selection_method_from_name(j.at("method").get<std::string>());
    const json& cfg = j.at("config");
    plan.config.iterations = cfg.at("iterations").get<int>();
    plan.config.half_window = cfg.at("half_window").get<int>();
    plan.config.lambda_first = cfg.at("lambda_first").get<double>();
    plan.config.lambda_rest = cfg.at("lambda_rest").get<double>();
    plan.config.block_threshold = cfg.at("block_threshold").get<double>();
    plan.config.fifo_size = cfg.at("fifo_size").get<int>();
    plan.config.denoise_neighbors = cfg.at("denoise_neighbors").get<int>();
    for (const json& b : j.at("blocks"))
      plan.blocks.blocks.push_back({b[0].get<int>() - 1, b[1].get<int>()});
    for (const json& it : j.at("iterations")) {
      IterationRecord rec;
      rec.lambda = it.at("lambda").get<double>();
      rec.selected = indices_from_json(it.at("selected"));
      for (const json& t : it.at("trails")) {
        KeyframeTrail trail;
        trail.begin = t.at("first").get<int>() - 1;
        trail.t = indices_from_json(t.at("t"));
        trail.total_cost = t.at("cost").get<double>();
        rec.trails.push_back(std::move(trail));
      }
      for (const json& f : it.at("fifo_sets")) rec.fifo_sets.push_back(indices_from_json(f));
      rec.coverage_popcount = it.at("coverage").get<std::vector<size_t>>();
      plan.iterations.push_back(std::move(rec));
    }
    for (const json& k : j.at("keyframes")) plan.keyframes.push_back(indices_from_json(k));
  } catch (const json::exception& e) {
    fail(Status::Format, "%s: %s", path.c_str(), e.what());
  }
  plan.validate();
  return plan;
}

std::string run_gen(const std::string& script_path, const std::string& camera_spec_path,
                    const std::string& out_dir) {
  MotionScript script = motion_script_from_json_file(script_path);
  CameraSpec cams;
  if (!camera_spec_path.empty()) cams = camera_spec_from_json_file(camera_spec_path);
  return generate_sequence(script, cams, out_dir);
}

SelectOutputs run_select(Sequence& sequence, const PipelineConfig& cfg, SelectionMethod method,
                         const std::string& out_dir) {
  auto t0 = std::chrono::steady_clock::now();
  const Body& body = sequence.body();
  cfg.validate(body.skeleton.joint_count());
  fs::create_directories(out_dir);

  const int n = sequence.frame_count();
  std::vector<Pose> poses;
  std::vector<BitVec> visibility;
  poses.reserve(n);
  visibility.reserve(n);
  for (int i = 0; i < n; ++i) {
    poses.push_back(sequence.pose(i));
    const DepthImage* depth = sequence.depth(i);
    require(depth != nullptr, Status::InvalidArgument,
            "frame " + std::to_string(i + 1) + " has no depth image");
    visibility.push_back(compute_visibility(body, poses[i], sequence.camera(i), *depth));
  }
  double vis_ms = ms_since(t0);

  EnergyConfig ecfg = cfg.energy;
  SelectOutputs out;
  out.plan = select_keyframes(poses, visibility, cfg.selection, ecfg, method);

  for (const IterationRecord& rec : out.plan.iterations) {
    double total = 0.0;
    for (const KeyframeTrail& t : rec.trails) total += t.total_cost;
    out.iteration_costs.push_back(total);
  }

  // First-iteration energy matrix dumps (the blocks derive from it).
  std::vector<KeyframeSetState> initial;
  for (int i = 0; i < n; ++i) initial.push_back(KeyframeSetState::initial(i, visibility[i]));
  EnergyMatrix first = build_energy_matrix(pose_energy_matrix(poses, ecfg), visibility, initial,
                                           cfg.selection.lambda_first);
  save_matrix_csv(first.cost, n, (fs::path(out_dir) / "energy_E.csv").string());
  save_matrix_csv(first.visibility_part, n, (fs::path(out_dir) / "energy_Ev.csv").string());
  save_matrix_pgm(first.visibility_part, n, (fs::path(out_dir) / "energy_Ev.pgm").string());

  // Trails: one row per frame, one column per iteration (1-based indices).
  {
    std::FILE* f = std::fopen((fs::path(out_dir) / "trails.csv").string().c_str(), "wb");
    require(f != nullptr, Status::Io, "cannot open trails.csv for writing");
    std::fprintf(f, "frame");
    for (size_t it = 0; it < out.plan.iterations.size(); ++it)
      std::fprintf(f, ",iteration%zu", it + 1);
    std::fputc('\n', f);
    for (int i = 0; i < n; ++i) {
      std::fprintf(f, "%d", i + 1);
      for (const IterationRecord& rec : out.plan.iterations)
        std::fprintf(f, ",%d", rec.selected[i] + 1);
      std::fputc('\n', f);
    }
    std::fclose(f);
  }

  out.plan_path = (fs::path(out_dir) / "plan.json").string();
  plan_to_json_file(out.plan, out.plan_path);

  {
    json summary{{"format_version", 1},
                 {"method", selection_method_name(method)},
                 {"frame_count", n},
                 {"blocks", out.plan.blocks.blocks.size()},
                 {"iteration_costs", out.iteration_costs},
                 {"first_iteration_cost", out.iteration_costs.empty() ? 0.0
                                                                      : out.iteration_costs[0]}};
    std::ofstream s((fs::path(out_dir) / "summary.json").string());
    require(s.good(), Status::Io, "cannot open summary.json for writing");
    s << summary.dump(2) << "\n";
  }

  PF_LOG_INFO("stage=select method=%s frames=%d blocks=%zu visibility_ms=%.1f total_ms=%.1f",
              selection_method_name(method), n, out.plan.blocks.blocks.size(), vis_ms,
              ms_since(t0));
  return out;
}

namespace {

// Collision handling for one fused frame; returns the no-collision frame used,
// or -1.
int handle_collisions(const Body& body, Sequence& sequence, const KeyframePlan& plan,
                      const PipelineConfig& cfg, const OccupancyProvider& provider, int frame,
                      VoxelVolume& volume) {
  std::vector<Vec3> posed_t = skin_pose(body, sequence.pose(frame));
  CollisionSet merged;
  for (int k : plan.keyframes[frame]) {
    if (k == frame) continue;
    std::vector<Vec3> posed_k = skin_pose(body, sequence.pose(k));
    CollisionSet set =
        detect_collisions(posed_t, posed_k, body.proxy.mesh.vertices, cfg.collision);
    merged.pairs.insert(merged.pairs.end(), set.pairs.begin(), set.pairs.end());
    std::vector<int> joined;
    std::set_union(merged.vertices.begin(), merged.vertices.end(), set.vertices.begin(),
                   set.vertices.end(), std::back_inserter(joined));
    merged.vertices = std::move(joined);
  }
  if (merged.empty()) return -1;

  CollisionResolution res =
      find_no_collision_frame(body, sequence, frame, merged, cfg.collision);
  if (!res.found) return -1;

  // Reconstruct the collision-free frame (no handling there) and deform it in.
  FuseResult clean =
      fuse_frame(body, sequence, plan.keyframes[res.frame], res.frame, provider, cfg.fusion);
  TriMesh model = extract_mesh(clean.volume, cfg.fusion.iso_level);
  if (model.empty()) return -1;
  PointWarp warp(body, sequence.pose(res.frame), sequence.pose(frame), cfg.fusion.band);
  for (Vec3& v : model.vertices) {
    WarpedPoint wp = warp.warp(v);
    if (wp.ok) v = wp.position;
  }
  apply_collision_fusion(volume, model, posed_t, merged.vertices, cfg.collision);
  return res.frame;
}

}  // namespace

FuseOutputs run_fuse(Sequence& sequence, const KeyframePlan& plan, const PipelineConfig& cfg,
                     std::vector<int> frames, int jobs, bool dump_intermediate,
                     const std::string& out_dir) {
  const Body& body = sequence.body();
  cfg.validate(body.skeleton.joint_count());
  require(plan.frame_count == sequence.frame_count(), Status::InvalidArgument,
          "plan does not match the manifest frame count");
  if (frames.empty()) {
    frames.resize(sequence.frame_count());
    for (int i = 0; i < sequence.frame_count(); ++i) frames[i] = i;
  }
  for (int f : frames)
    require(f >= 0 && f < sequence.frame_count(), Status::InvalidArgument,
            "requested frame out of range");

  fs::create_directories(fs::path(out_dir) / "meshes");
  fs::create_directories(fs::path(out_dir) / "volumes");

  std::unique_ptr<OccupancyProvider> provider = make_provider(cfg.provider, body.skeleton);

  // Depth images are loaded lazily through a shared cache; prefetch serially
  // so worker threads only read.
  for (int f : frames)
    for (int k : plan.keyframes[f]) sequence.depth(k);

  FuseOutputs outputs;
  std::mutex mutex;
  std::atomic<size_t> next{0};

  auto worker = [&]() {
    while (true) {
      size_t idx = next.fetch_add(1);
      if (idx >= frames.size()) return;
      int frame = frames[idx];
      auto t0 = std::chrono::steady_clock::now();
      try {
        std::vector<std::pair<int, OccupancyGrid>> weight_dumps;
        FuseResult result =
            fuse_frame(body, sequence, plan.keyframes[frame], frame, *provider, cfg.fusion,
                       dump_intermediate ? &weight_dumps : nullptr);
        int resolved = -1;
        if (cfg.collision_enabled) {
          resolved = handle_collisions(body, sequence, plan, cfg, *provider, frame,
                                       result.volume);
        }
        TriMesh mesh = extract_mesh(result.volume, cfg.fusion.iso_level);
        save_ply(mesh, (fs::path(out_dir) / "meshes" / frame_name("frame", frame, "ply")).string());
        save_obj(mesh, (fs::path(out_dir) / "meshes" / frame_name("frame", frame, "obj")).string());
        save_volume(result.volume,
                    (fs::path(out_dir) / "volumes" / frame_name("frame", frame, "pfvo")).string());
        if (dump_intermediate) {
          for (auto& [k, grid] : weight_dumps) {
            char buf[128];
            std::snprintf(buf, sizeof(buf), "frame_%04d_kf_%04d_weights.pfvo", frame + 1, k + 1);
            save_pfvo(grid, (fs::path(out_dir) / "volumes" / buf).string());
          }
        }
        std::lock_guard<std::mutex> lock(mutex);
        outputs.fused_frames.push_back(frame);
        if (resolved >= 0) outputs.collision_fixes.push_back(frame);
        PF_LOG_INFO(
            "stage=fuse frame=%d keyframes=%zu valid_voxels=%zu deform_ms=%.1f query_ms=%.1f "
            "blend_ms=%.1f total_ms=%.1f collision_frame=%d",
            frame + 1, plan.keyframes[frame].size(), result.valid_voxels,
            result.timings.deform_ms, result.timings.query_ms, result.timings.blend_ms,
            ms_since(t0), resolved >= 0 ? resolved + 1 : 0);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(mutex);
        outputs.failed_frames.push_back(frame);
        PF_LOG_ERROR("stage=fuse frame=%d failed: %s", frame + 1, e.what());
      }
    }
  };

  int workers = std::max(1, std::min<int>(jobs > 0 ? jobs : 1, static_cast<int>(frames.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  std::sort(outputs.fused_frames.begin(), outputs.fused_frames.end());
  std::sort(outputs.failed_frames.begin(), outputs.failed_frames.end());
  std::sort(outputs.collision_fixes.begin(), outputs.collision_fixes.end());
  return outputs;
}

std::vector<EvalRow> run_eval(Sequence& sequence,
                              const std::vector<std::pair<std::string, std::string>>& mesh_dirs,
                              const std::string& out_csv, std::vector<std::string>* missing) {
  const Body& body = sequence.body();
  std::vector<EvalRow> rows;

  for (const auto& [label, dir] : mesh_dirs) {
    std::vector<DistanceStats> frame_stats;
    for (int f = 0; f < sequence.frame_count(); ++f) {
      fs::path mesh_path = fs::path(dir) / frame_name("frame", f, "ply");
      if (!fs::exists(mesh_path)) continue;  // not every frame has a mesh
      TriMesh mesh = load_ply(mesh_path.string());
      if (mesh.empty()) {
        if (missing) missing->push_back(mesh_path.string() + " (empty mesh)");
        continue;
      }

      // Ground truth: merged multi-view depth when available, else the posed
      // proxy surface.
      std::vector<Vec3> cloud;
      auto gt_views = sequence.gt_depth_views(f);
      if (!gt_views.empty()) {
        for (const auto& [cam, path] : gt_views) {
          DepthImage depth = load_pfdm(path);
          RigidTransform cam_to_world = cam.extrinsic.inverse();
          for (int y = 0; y < depth.height; y += 2) {
            for (int x = 0; x < depth.width; x += 2) {
              double z = depth.at(x, y);
              if (z <= 0.0) continue;
              Vec3 p_cam((x - cam.cx) / cam.fx * z, (y - cam.cy) / cam.fy * z, z);
              cloud.push_back(cam_to_world.apply(p_cam));
            }
          }
        }
      } else {
        cloud = sample_capsule_union_surface(posed_capsules(body.skeleton, sequence.pose(f)),
                                             30000, 71221);
      }
      if (cloud.empty()) {
        if (missing) missing->push_back(mesh_path.string() + " (no ground truth)");
        continue;
      }
      EvalRow row;
      row.frame = f + 1;
      row.label = label;
      row.stats = mesh_to_points_distance(mesh, cloud, 20000, 417);
      rows.push_back(row);
      frame_stats.push_back(row.stats);
    }
    if (frame_stats.empty()) {
      if (missing) missing->push_back(dir + " (no frames evaluated)");
      continue;
    }
    EvalRow summary;
    summary.frame = 0;
    summary.label = label;
    double rms_sq = 0.0;
    for (const DistanceStats& s : frame_stats) {
      summary.stats.mean += s.mean;
      summary.stats.max = std::max(summary.stats.max, s.max);
      rms_sq += s.rms * s.rms;
      summary.stats.count += s.count;
    }
    summary.stats.mean /= frame_stats.size();
    summary.stats.rms = std::sqrt(rms_sq / frame_stats.size());
    rows.push_back(summary);
  }

  if (!out_csv.empty()) {
    std::FILE* f = std::fopen(out_csv.c_str(), "wb");
    require(f != nullptr, Status::Io, "cannot open for writing: " + out_csv);
    std::fprintf(f, "frame,label,mean,max,rms\n");
    for (const EvalRow& r : rows) {
      if (r.frame > 0)
        std::fprintf(f, "%d,%s,%.6f,%.6f,%.6f\n", r.frame, r.label.c_str(), r.stats.mean,
                     r.stats.max, r.stats.rms);
    }
    for (const EvalRow& r : rows) {
      if (r.frame == 0)
        std::fprintf(f, "all,%s,%.6f,%.6f,%.6f\n", r.label.c_str(), r.stats.mean, r.stats.max,
                     r.stats.rms);
    }
    // Two-method comparison: emit the mean difference.
    std::vector<const EvalRow*> summaries;
    for (const EvalRow& r : rows)
      if (r.frame == 0) summaries.push_back(&r);
    if (summaries.size() == 2) {
      std::fprintf(f, "diff,%s-%s,%.6f,,\n", summaries[0]->label.c_str(),
                   summaries[1]->label.c_str(), summaries[0]->stats.mean - summaries[1]->stats.mean);
    }
    std::fclose(f);
  }
  return rows;
}

}  // namespace pf
