#include "crosspaint/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "json_util.hpp"

namespace crosspaint {

namespace fs = std::filesystem;
using detail::json;

void AugmentConfig::Validate() const {
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (targets.empty()) throw ConfigError("no target robots configured");
  fusion.Validate();
  base_tuning.Validate();
  inpaint.Validate();
  if (!(ik.damping > 0) || ik.max_iterations < 1 || !(ik.pos_tol > 0) || !(ik.rot_tol > 0) ||
      !(ik.max_position_step > 0) || !(ik.max_rotation_step > 0)) {
    throw ConfigError("ik parameters must be positive");
  }
}

AugmentConfig DefaultConfig() {
  AugmentConfig c;
  c.robot_dirs.push_back(CROSSPAINT_ROBOTS_DIR);
  c.targets = {"arm6b", "arm6c"};
  return c;
}

namespace {

json ToJson(const AugmentConfig& c) {
  json robot_dirs = json::array();
  for (const auto& d : c.robot_dirs) robot_dirs.push_back(d.string());
  json robots = json::object();
  for (const auto& [id, p] : c.robots) robots[id] = p.string();
  return {
      {"robot_dirs", robot_dirs},
      {"robots", robots},
      {"targets", c.targets},
      {"fusion",
       {{"search_radius_px", c.fusion.search_radius_px},
        {"search_step_px", c.fusion.search_step_px},
        {"refine", c.fusion.refine},
        {"prune_tau_px", c.fusion.prune_tau_px},
        {"close_kernel_px", c.fusion.close_kernel_px},
        {"flag_iou_threshold", c.fusion.flag_iou_threshold}}},
      {"base_tuning",
       {{"initial_delta_m", c.base_tuning.initial_delta_m},
        {"error_cutoff_m", c.base_tuning.error_cutoff_m},
        {"max_iterations", c.base_tuning.max_iterations},
        {"min_delta_m", c.base_tuning.min_delta_m}}},
      {"ik",
       {{"damping", c.ik.damping},
        {"max_iterations", c.ik.max_iterations},
        {"pos_tol", c.ik.pos_tol},
        {"rot_tol", c.ik.rot_tol},
        {"max_position_step", c.ik.max_position_step},
        {"max_rotation_step", c.ik.max_rotation_step}}},
      {"inpaint",
       {{"mode", c.inpaint.tool_command.empty() ? std::string("baseline")
                                                : "external:" + c.inpaint.tool_command},
        {"mask_dilation_px", c.inpaint.mask_dilation_px},
        {"fill_iterations", c.inpaint.fill_iterations},
        {"fill_tolerance", c.inpaint.fill_tolerance}}},
      {"composite", {{"feather_edges", c.composite.feather_edges}}},
      {"workers", c.workers},
      {"output_root", c.output_root.string()},
  };
}

fs::path Resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

// Copies keys of `src` into `dst`, rejecting any key `dst` lacks and any
// value whose JSON type differs from the default's.
void Merge(json& dst, const json& src, const std::string& where) {
  if (!src.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : src.items()) {
    const std::string name = where.empty() ? key : where + "." + key;
    if (!dst.contains(key)) throw ConfigError("unknown config key " + name);
    json& slot = dst[key];
    if (slot.is_object() && key != "robots") {
      Merge(slot, value, name);
      continue;
    }
    const bool numeric_ok = slot.is_number() && value.is_number();
    if (!numeric_ok && slot.type() != value.type()) {
      throw ConfigError("config key " + name + " has the wrong type");
    }
    if (slot.is_number_integer() && value.is_number_float()) {
      const double v = value.get<double>();
      if (v != double((long long)v)) throw ConfigError("config key " + name + " must be an integer");
      slot = (long long)v;
    } else {
      slot = value;
    }
  }
}

AugmentConfig FromJson(const json& j, const fs::path& base_dir) {
  AugmentConfig c;
  for (const auto& d : j.at("robot_dirs")) c.robot_dirs.push_back(Resolve(base_dir, d.get<std::string>()));
  for (const auto& [id, p] : j.at("robots").items()) {
    if (!p.is_string()) throw ConfigError("robots." + id + " must be a path string");
    c.robots[id] = Resolve(base_dir, p.get<std::string>());
  }
  c.targets = j.at("targets").get<std::vector<std::string>>();
  const json& f = j.at("fusion");
  c.fusion.search_radius_px = f.at("search_radius_px").get<int>();
  c.fusion.search_step_px = f.at("search_step_px").get<int>();
  c.fusion.refine = f.at("refine").get<bool>();
  c.fusion.prune_tau_px = f.at("prune_tau_px").get<double>();
  c.fusion.close_kernel_px = f.at("close_kernel_px").get<int>();
  c.fusion.flag_iou_threshold = f.at("flag_iou_threshold").get<double>();
  const json& b = j.at("base_tuning");
  c.base_tuning.initial_delta_m = b.at("initial_delta_m").get<double>();
  c.base_tuning.error_cutoff_m = b.at("error_cutoff_m").get<double>();
  c.base_tuning.max_iterations = b.at("max_iterations").get<int>();
  c.base_tuning.min_delta_m = b.at("min_delta_m").get<double>();
  const json& k = j.at("ik");
  c.ik.damping = k.at("damping").get<double>();
  c.ik.max_iterations = k.at("max_iterations").get<int>();
  c.ik.pos_tol = k.at("pos_tol").get<double>();
  c.ik.rot_tol = k.at("rot_tol").get<double>();
  c.ik.max_position_step = k.at("max_position_step").get<double>();
  c.ik.max_rotation_step = k.at("max_rotation_step").get<double>();
  const json& in = j.at("inpaint");
  const std::string mode = in.at("mode").get<std::string>();
  if (mode.rfind("external:", 0) == 0) {
    c.inpaint.tool_command = mode.substr(9);
    if (c.inpaint.tool_command.empty()) throw ConfigError("inpaint.mode external: needs a command");
  } else if (mode != "baseline") {
    throw ConfigError("inpaint.mode must be \"baseline\" or \"external:<command>\", got \"" + mode + "\"");
  }
  c.inpaint.mask_dilation_px = in.at("mask_dilation_px").get<int>();
  c.inpaint.fill_iterations = in.at("fill_iterations").get<int>();
  c.inpaint.fill_tolerance = in.at("fill_tolerance").get<double>();
  c.composite.feather_edges = j.at("composite").at("feather_edges").get<bool>();
  c.workers = j.at("workers").get<int>();
  c.output_root = Resolve(base_dir, j.at("output_root").get<std::string>());
  return c;
}

}  // namespace

AugmentConfig ConfigFromJsonText(const std::string& text, const fs::path& base_dir) {
  json user;
  try {
    user = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  // Arrays replace the defaults wholesale, so a config naming its own
  // robot_dirs drops the bundled directory.
  json merged = ToJson(DefaultConfig());
  Merge(merged, user, "");
  try {
    return FromJson(merged, base_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

AugmentConfig LoadConfig(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ConfigFromJsonText(ss.str(), path.parent_path());
}

std::string ConfigToJsonText(const AugmentConfig& config) { return ToJson(config).dump(2) + "\n"; }

void ApplyOverride(AugmentConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override must look like section.key=value, got \"" + assignment + "\"");
  }
  const std::string path = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }
  json patch = value;
  std::string rest = path;
  std::vector<std::string> keys;
  for (std::size_t pos; (pos = rest.find('.')) != std::string::npos; rest = rest.substr(pos + 1)) {
    keys.push_back(rest.substr(0, pos));
  }
  keys.push_back(rest);
  for (auto it = keys.rbegin(); it != keys.rend(); ++it) patch = json{{*it, patch}};
  json merged = ToJson(config);
  Merge(merged, patch, "");
  try {
    config = FromJson(merged, fs::current_path());
  } catch (const json::exception& e) {
    throw ConfigError("override " + assignment + ": " + e.what());
  }
}

void ApplyEnvironment(AugmentConfig& config) {
  const char* env = std::getenv("CROSSPAINT_WORKERS");
  if (!env || !*env) return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1 || n > 1024) {
    throw ConfigError(std::string("CROSSPAINT_WORKERS must be an integer in [1, 1024], got \"") + env + "\"");
  }
  config.workers = int(n);
}

RobotRegistry RobotRegistry::FromConfig(const AugmentConfig& config) {
  RobotRegistry r;
  std::map<std::string, fs::path> paths;
  for (const auto& dir : config.robot_dirs) {
    if (!fs::is_directory(dir)) throw ConfigError("robot directory " + dir.string() + " does not exist");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.path().extension() == ".urdf") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const std::string id = f.stem().string();
      if (paths.count(id)) throw ConfigError("robot id " + id + " is registered twice");
      paths[id] = f;
    }
  }
  for (const auto& [id, p] : config.robots) paths[id] = p;
  for (const auto& [id, p] : paths) {
    try {
      r.models_[id] = std::make_shared<const RobotModel>(LoadRobotDescription(p.string()));
    } catch (const Error& e) {
      throw ConfigError("robot " + id + " (" + p.string() + "): " + e.what());
    }
  }
  return r;
}

const RobotModel& RobotRegistry::at(const std::string& id) const {
  const auto it = models_.find(id);
  if (it == models_.end()) {
    std::string known;
    for (const auto& [k, v] : models_) known += (known.empty() ? "" : ", ") + k;
    throw ConfigError("unknown robot id \"" + id + "\" (registered: " + known + ")");
  }
  return *it->second;
}

std::vector<std::string> RobotRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : models_) out.push_back(k);
  return out;
}

}  // namespace crosspaint
