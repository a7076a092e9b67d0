// Command-line driver for the posefuse pipeline. Everything goes through the
// public C API in posefuse.h; exit codes are 0 (success), 1 (validation
// error), 2 (runtime failure).

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "posefuse.h"

namespace {

int exit_code_for(pf_status status) {
  switch (status) {
    case PF_OK:
      return 0;
    case PF_ERROR_INVALID_ARGUMENT:
    case PF_ERROR_FORMAT:
      return 1;
    default:
      return 2;
  }
}

int report(pf_status status) {
  if (status != PF_OK) {
    std::fprintf(stderr, "posefuse: %s: %s\n", pf_status_name(status), pf_last_error());
  }
  return exit_code_for(status);
}

// "a..b" (inclusive), "a,b,c", or "none"; 1-based frame indices.
bool parse_frames(const std::string& text, std::vector<int32_t>& out) {
  if (text.empty() || text == "none") return true;
  size_t range = text.find("..");
  if (range != std::string::npos) {
    try {
      int a = std::stoi(text.substr(0, range));
      int b = std::stoi(text.substr(range + 2));
      if (a < 1 || b < a) return false;
      for (int f = a; f <= b; ++f) out.push_back(f);
      return true;
    } catch (...) {
      return false;
    }
  }
  size_t pos = 0;
  while (pos < text.size()) {
    size_t comma = text.find(',', pos);
    std::string tok = text.substr(pos, comma == std::string::npos ? std::string::npos
                                                                  : comma - pos);
    try {
      int f = std::stoi(tok);
      if (f < 1) return false;
      out.push_back(f);
    } catch (...) {
      return false;
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return !out.empty();
}

struct ConfigHandle {
  pf_config* config = nullptr;
  ~ConfigHandle() { pf_config_destroy(config); }
};

pf_status load_config(const std::string& path, ConfigHandle& handle) {
  return path.empty() ? pf_config_default(&handle.config)
                      : pf_config_load(path.c_str(), &handle.config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"posefuse: pose-guided keyframe selection and implicit surface fusion"};
  app.require_subcommand(1);

  std::string script, cameras, out_dir, manifest, config_path, method = "dp", plan_path;
  std::string frames_text, eval_csv;
  std::vector<std::string> mesh_dirs, labels;
  int jobs = 1;
  bool dump_intermediate = false;

  auto* gen = app.add_subcommand("gen", "generate a synthetic sequence");
  gen->add_option("--script", script, "motion script JSON")->required();
  gen->add_option("--cameras", cameras, "camera spec JSON (defaults when omitted)");
  gen->add_option("--out", out_dir, "output directory")->required();

  auto* select = app.add_subcommand("select", "select keyframes for every frame");
  select->add_option("--manifest", manifest, "sequence manifest JSON")->required();
  select->add_option("--config", config_path, "pipeline config JSON");
  select->add_option("--method", method, "dp|greedy|perframe")->capture_default_str();
  select->add_option("--out", out_dir, "output directory")->required();

  auto* fuse = app.add_subcommand("fuse", "fuse frames into meshes and volumes");
  fuse->add_option("--manifest", manifest, "sequence manifest JSON")->required();
  fuse->add_option("--plan", plan_path, "keyframe plan JSON")->required();
  fuse->add_option("--config", config_path, "pipeline config JSON");
  fuse->add_option("--frames", frames_text, "frames to fuse: a..b or a,b,c (default all)");
  fuse->add_option("--jobs", jobs, "parallel frame workers")->capture_default_str();
  fuse->add_flag("--dump-intermediate", dump_intermediate, "write per-keyframe weight volumes");
  fuse->add_option("--out", out_dir, "output directory")->required();

  auto* eval = app.add_subcommand("eval", "evaluate fused meshes against ground truth");
  eval->add_option("--manifest", manifest, "sequence manifest JSON")->required();
  eval->add_option("--meshes", mesh_dirs, "mesh directory (repeatable)")->required();
  eval->add_option("--labels", labels, "label per mesh directory");
  eval->add_option("--out", eval_csv, "metrics CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  if (gen->parsed()) {
    return report(pf_run_gen(script.c_str(), cameras.empty() ? nullptr : cameras.c_str(),
                             out_dir.c_str()));
  }

  if (select->parsed()) {
    ConfigHandle cfg;
    pf_status status = load_config(config_path, cfg);
    if (status != PF_OK) return report(status);
    return report(pf_run_select(manifest.c_str(), cfg.config, method.c_str(), out_dir.c_str()));
  }

  if (fuse->parsed()) {
    std::vector<int32_t> frames;
    if (!parse_frames(frames_text, frames)) {
      std::fprintf(stderr, "posefuse: invalid --frames '%s'\n", frames_text.c_str());
      return 1;
    }
    if (frames_text == "none") return 0;  // explicitly empty request: nothing to do
    ConfigHandle cfg;
    pf_status status = load_config(config_path, cfg);
    if (status != PF_OK) return report(status);
    int32_t failed = 0;
    status = pf_run_fuse(manifest.c_str(), plan_path.c_str(), cfg.config,
                         frames.empty() ? nullptr : frames.data(), frames.size(), jobs,
                         dump_intermediate ? 1 : 0, out_dir.c_str(), &failed);
    if (status != PF_OK) return report(status);
    if (failed > 0) {
      std::fprintf(stderr, "posefuse: %d frame(s) failed to fuse\n", failed);
      return 2;
    }
    return 0;
  }

  if (eval->parsed()) {
    std::vector<const char*> dirs, label_ptrs;
    for (const auto& d : mesh_dirs) dirs.push_back(d.c_str());
    if (!labels.empty() && labels.size() != mesh_dirs.size()) {
      std::fprintf(stderr, "posefuse: --labels count must match --meshes count\n");
      return 1;
    }
    for (const auto& l : labels) label_ptrs.push_back(l.c_str());
    return report(pf_run_eval(manifest.c_str(), dirs.data(),
                              labels.empty() ? nullptr : label_ptrs.data(), dirs.size(),
                              eval_csv.c_str()));
  }

  return 1;
}
