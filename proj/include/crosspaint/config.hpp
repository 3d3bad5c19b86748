#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "crosspaint/composite.hpp"
#include "crosspaint/inpaint.hpp"
#include "crosspaint/kinematics.hpp"
#include "crosspaint/maskfusion.hpp"
#include "crosspaint/replay.hpp"

namespace crosspaint {

// Settings for a batch. Stored as JSON:
//   {
//     "robot_dirs": ["robots"],              every *.urdf, id = file stem
//     "robots": {"myarm": "path/arm.urdf"},  explicit entries win
//     "targets": ["arm6b", "arm6c"],
//     "fusion": {...}, "base_tuning": {...}, "ik": {...},
//     "inpaint": {"mode": "baseline" | "external:<command>", ...},
//     "composite": {"feather_edges": false},
//     "workers": 1,
//     "output_root": ""                       empty: write into the dataset
//   }
// Relative paths resolve against the config file's directory.
struct AugmentConfig {
  std::vector<std::filesystem::path> robot_dirs;
  std::map<std::string, std::filesystem::path> robots;
  std::vector<std::string> targets;
  FusionParams fusion;
  BaseTuningParams base_tuning;
  IkParams ik;
  InpaintParams inpaint;  // tool_command non-empty means external mode
  CompositeParams composite;
  int workers = 1;
  std::filesystem::path output_root;

  // Throws ConfigError.
  void Validate() const;
};

// Defaults with the bundled robots directory registered.
AugmentConfig DefaultConfig();

// Unknown keys are rejected. Throws ConfigError.
AugmentConfig LoadConfig(const std::filesystem::path& path);
AugmentConfig ConfigFromJsonText(const std::string& text, const std::filesystem::path& base_dir);
std::string ConfigToJsonText(const AugmentConfig& config);

// Applies "section.key=value" (or "key=value" for top-level scalars). The
// value is parsed as JSON, falling back to a plain string.
void ApplyOverride(AugmentConfig& config, const std::string& assignment);

// Reads CROSSPAINT_WORKERS when set. Throws ConfigError on a bad value.
void ApplyEnvironment(AugmentConfig& config);

// Immutable id -> model map shared by all workers.
class RobotRegistry {
 public:
  // Throws ConfigError on duplicate ids or unreadable descriptions.
  static RobotRegistry FromConfig(const AugmentConfig& config);

  bool contains(const std::string& id) const { return models_.count(id) > 0; }
  // Throws ConfigError for unknown ids.
  const RobotModel& at(const std::string& id) const;
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, std::shared_ptr<const RobotModel>> models_;
};

}  // namespace crosspaint
