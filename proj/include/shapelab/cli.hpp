#pragma once

// Scene files and the command-line runner: one mode per scene, residual gates,
// reports, grid fields and meshes written under an output directory.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace shapelab {

/// verify-curvature, codazzi, pencil-scan, darboux, goursat, triple, compat,
/// frames, reconstruct, family.
const std::vector<std::string>& scene_modes();

/// Default grid, tolerance and lambda values per mode, plus the keys each mode
/// requires and accepts.
const nlohmann::json& scene_defaults();

struct SceneConfig {
  std::string mode;
  std::string name;
  /// Samples per axis; empty means the mode default.
  std::vector<int> grid;
  double tol = 0.0;
  std::vector<double> lambdas;
  /// Mode-specific keys as given in the scene.
  nlohmann::json inputs = nlohmann::json::object();
};

/// Throws ValidationError on an unknown mode, an unknown key, a missing
/// required key or a mistyped common key. Defaults are filled in.
SceneConfig parse_scene(const nlohmann::json& scene);
SceneConfig load_scene(const std::string& path);

/// "64x64" or "17x17x17".
std::vector<int> parse_grid_spec(const std::string& spec);
/// "0.1,1,10".
std::vector<double> parse_lambda_list(const std::string& spec);

struct RunResult {
  /// 0 when every gate passes, 1 otherwise.
  int exit_code = 0;
  nlohmann::json summary;
  /// Paths of the written files, summary last.
  std::vector<std::string> artifacts;
  /// Report file of the first failing gate.
  std::string failing_report;
};

/// Runs the scene and writes "<name>.summary.json" and the mode's artifacts
/// into `out_dir` via temp-and-rename. The summary contains no timestamps or
/// absolute paths. Validation and parse errors propagate as exceptions.
RunResult run_scene(const SceneConfig& config, const std::string& out_dir);

/// Entry point of the shapelab binary; returns the process exit status
/// (0 pass, 1 gate failure, 2 validation or parse error).
int cli_main(int argc, char** argv);

}  // namespace shapelab
