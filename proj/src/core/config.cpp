#include "config.hpp"

#include <json.hpp>

#include <fstream>

#include "error.hpp"

namespace pf {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* what) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (key == a) known = true;
    if (!known) fail(Status::Format, "unknown key '%s' in %s", key.c_str(), what);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

PoseMetric metric_from_name(const std::string& name) {
  if (name == "squared_l2") return PoseMetric::SquaredL2;
  if (name == "l2") return PoseMetric::L2;
  fail(Status::Format, "unknown pose metric '%s' (want squared_l2|l2)", name.c_str());
}

const char* metric_name(PoseMetric m) {
  return m == PoseMetric::SquaredL2 ? "squared_l2" : "l2";
}

}  // namespace

void PipelineConfig::validate(size_t joint_count) const {
  selection.validate();
  energy.validate(joint_count);
  fusion.validate();
  collision.validate();
  require(provider.type == "analytic" || provider.type == "depth" || provider.type == "file",
          Status::InvalidArgument, "provider type must be analytic|depth|file");
  if (provider.type == "file")
    require(!provider.path.empty(), Status::InvalidArgument,
            "file provider needs a volume path");
}

PipelineConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(Status::Format, "config: %s", e.what());
  }
  check_keys(j,
             {"format_version", "selection", "energy", "fusion", "collision", "provider",
              "output_dir"},
             "config");
  if (j.contains("format_version") && j.at("format_version").get<int>() != 1)
    fail(Status::Format, "unsupported config format_version");

  PipelineConfig cfg;
  try {
    if (j.contains("selection")) {
      const json& s = j.at("selection");
      check_keys(s,
                 {"iterations", "half_window", "lambda_first", "lambda_rest", "block_threshold",
                  "fifo_size", "denoise_neighbors"},
                 "config.selection");
      read(s, "iterations", cfg.selection.iterations);
      read(s, "half_window", cfg.selection.half_window);
      read(s, "lambda_first", cfg.selection.lambda_first);
      read(s, "lambda_rest", cfg.selection.lambda_rest);
      read(s, "block_threshold", cfg.selection.block_threshold);
      read(s, "fifo_size", cfg.selection.fifo_size);
      read(s, "denoise_neighbors", cfg.selection.denoise_neighbors);
    }
    if (j.contains("energy")) {
      const json& e = j.at("energy");
      check_keys(e, {"joint_weights", "excluded_joints", "metric"}, "config.energy");
      read(e, "joint_weights", cfg.energy.joint_weights);
      read(e, "excluded_joints", cfg.energy.excluded_joints);
      if (e.contains("metric")) cfg.energy.metric = metric_from_name(e.at("metric"));
    }
    if (j.contains("fusion")) {
      const json& f = j.at("fusion");
      check_keys(f,
                 {"voxel_size", "band", "blend_tau", "blend_sigma", "weight_floor", "iso_level",
                  "bilinear_depth"},
                 "config.fusion");
      read(f, "voxel_size", cfg.fusion.voxel_size);
      read(f, "band", cfg.fusion.band);
      read(f, "blend_tau", cfg.fusion.blend_tau);
      read(f, "blend_sigma", cfg.fusion.blend_sigma);
      read(f, "weight_floor", cfg.fusion.weight_floor);
      read(f, "iso_level", cfg.fusion.iso_level);
      read(f, "bilinear_depth", cfg.fusion.bilinear_depth);
    }
    if (j.contains("collision")) {
      const json& c = j.at("collision");
      check_keys(c,
                 {"enabled", "tau1", "tau2", "resolve_proportion", "search_radius",
                  "mask_distance"},
                 "config.collision");
      read(c, "enabled", cfg.collision_enabled);
      read(c, "tau1", cfg.collision.tau1);
      read(c, "tau2", cfg.collision.tau2);
      read(c, "resolve_proportion", cfg.collision.resolve_proportion);
      read(c, "search_radius", cfg.collision.search_radius);
      read(c, "mask_distance", cfg.collision.mask_distance);
    }
    if (j.contains("provider")) {
      const json& p = j.at("provider");
      check_keys(p, {"type", "sharpness", "band", "path"}, "config.provider");
      read(p, "type", cfg.provider.type);
      read(p, "sharpness", cfg.provider.sharpness);
      read(p, "band", cfg.provider.band);
      read(p, "path", cfg.provider.path);
    }
    read(j, "output_dir", cfg.output_dir);
  } catch (const json::exception& e) {
    fail(Status::Format, "config: %s", e.what());
  }
  return cfg;
}

PipelineConfig config_from_json_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), Status::Io, "cannot open: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return config_from_json_text(text);
}

std::string config_to_json_text(const PipelineConfig& cfg) {
  json j{{"format_version", 1},
         {"selection",
          {{"iterations", cfg.selection.iterations},
           {"half_window", cfg.selection.half_window},
           {"lambda_first", cfg.selection.lambda_first},
           {"lambda_rest", cfg.selection.lambda_rest},
           {"block_threshold", cfg.selection.block_threshold},
           {"fifo_size", cfg.selection.fifo_size},
           {"denoise_neighbors", cfg.selection.denoise_neighbors}}},
         {"energy",
          {{"joint_weights", cfg.energy.joint_weights},
           {"excluded_joints", cfg.energy.excluded_joints},
           {"metric", metric_name(cfg.energy.metric)}}},
         {"fusion",
          {{"voxel_size", cfg.fusion.voxel_size},
           {"band", cfg.fusion.band},
           {"blend_tau", cfg.fusion.blend_tau},
           {"blend_sigma", cfg.fusion.blend_sigma},
           {"weight_floor", cfg.fusion.weight_floor},
           {"iso_level", cfg.fusion.iso_level},
           {"bilinear_depth", cfg.fusion.bilinear_depth}}},
         {"collision",
          {{"enabled", cfg.collision_enabled},
           {"tau1", cfg.collision.tau1},
           {"tau2", cfg.collision.tau2},
           {"resolve_proportion", cfg.collision.resolve_proportion},
           {"search_radius", cfg.collision.search_radius},
           {"mask_distance", cfg.collision.mask_distance}}},
         {"provider",
          {{"type", cfg.provider.type},
           {"sharpness", cfg.provider.sharpness},
           {"band", cfg.provider.band},
           {"path", cfg.provider.path}}},
         {"output_dir", cfg.output_dir}};
  return j.dump(2) + "\n";
}

void config_to_json_file(const PipelineConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), Status::Io, "cannot open for writing: " + path);
  out << config_to_json_text(cfg);
  require(out.good(), Status::Io, "short write: " + path);
}

std::unique_ptr<OccupancyProvider> make_provider(const ProviderConfig& cfg,
                                                 const Skeleton& skeleton) {
  if (cfg.type == "analytic")
    return std::make_unique<AnalyticOccupancy>(skeleton,
                                               AnalyticOracleConfig{cfg.sharpness});
  if (cfg.type == "depth") return std::make_unique<DepthOccupancy>(cfg.band);
  if (cfg.type == "file") return std::make_unique<FileVolumeOccupancy>(cfg.path);
  fail(Status::InvalidArgument, "provider type must be analytic|depth|file, got '%s'",
       cfg.type.c_str());
}

}  // namespace pf
