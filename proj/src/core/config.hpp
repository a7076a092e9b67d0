#pragma once

#include <memory>
#include <string>

#include "energy.hpp"
#include "fusion.hpp"
#include "occupancy.hpp"
#include "selector.hpp"

namespace pf {

struct ProviderConfig {
  std::string type = "analytic";  // analytic | depth | file
  double sharpness = 200.0;       // analytic
  double band = 0.04;             // depth
  std::string path;               // file ("{frame}" expands to the 1-based index)
};

// Whole-pipeline configuration; the on-disk JSON rejects unknown keys and
// round-trips exactly.
struct PipelineConfig {
  SelectionConfig selection;
  EnergyConfig energy;
  FusionConfig fusion;
  CollisionConfig collision;
  bool collision_enabled = true;
  ProviderConfig provider;
  std::string output_dir = "out";

  void validate(size_t joint_count) const;
};

PipelineConfig config_from_json_text(const std::string& text);
PipelineConfig config_from_json_file(const std::string& path);
std::string config_to_json_text(const PipelineConfig& cfg);
void config_to_json_file(const PipelineConfig& cfg, const std::string& path);

std::unique_ptr<OccupancyProvider> make_provider(const ProviderConfig& cfg,
                                                 const Skeleton& skeleton);

}  // namespace pf
