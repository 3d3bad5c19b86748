#include "crosspaint/container.hpp"

#include <algorithm>
#include <cmath>

#include "json_util.hpp"

namespace crosspaint {

namespace fs = std::filesystem;
using detail::json;

fs::path Container::frame_path(std::size_t i) const { return dir / "frames" / FrameFileName(i); }
fs::path Container::learned_mask_path(std::size_t i) const {
  return dir / "masks_learned" / FrameFileName(i);
}

namespace {

json CameraToJson(const CameraModel& c) {
  return {{"fx", c.fx},     {"fy", c.fy},         {"cx", c.cx},   {"cy", c.cy},
          {"width", c.width}, {"height", c.height}, {"near", c.near}, {"far", c.far},
          {"extrinsic", detail::PoseToJson(c.extrinsic)}};
}

CameraModel CameraFromJson(const json& j) {
  CameraModel c;
  c.fx = j.at("fx").get<double>();
  c.fy = j.at("fy").get<double>();
  c.cx = j.at("cx").get<double>();
  c.cy = j.at("cy").get<double>();
  c.width = j.at("width").get<int>();
  c.height = j.at("height").get<int>();
  c.near = j.value("near", c.near);
  c.far = j.value("far", c.far);
  c.extrinsic = detail::PoseFromJson(j.at("extrinsic"));
  return c;
}

std::size_t CountPngs(const fs::path& dir) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.path().extension() == ".png";
  return n;
}

// Fills `c` as far as possible, appending problems.
void Inspect(const fs::path& dir, Container& c, std::vector<std::string>& problems,
             bool stop_early) {
  auto fail = [&](std::string msg) { problems.push_back(std::move(msg)); };
  c.dir = dir;
  c.trajectory.id = dir.filename().string();
  json meta, poses;
  try {
    meta = detail::ReadJsonFile<InvalidContainer>(dir / "meta.json");
  } catch (const InvalidContainer& e) {
    fail(std::string("meta.json: ") + e.what());
    return;
  }
  try {
    c.meta.schema_version = meta.at("schema_version").get<int>();
    if (c.meta.schema_version != kSchemaVersion) {
      fail("meta.json: unsupported schema_version " + std::to_string(c.meta.schema_version));
    }
    c.meta.robot = meta.at("robot").get<std::string>();
    c.meta.camera = CameraFromJson(meta.at("camera"));
    c.meta.camera.Validate();
    c.meta.source_base = detail::PoseFromJson(meta.at("source_base"));
    c.meta.frame_rate = meta.at("frame_rate").get<double>();
    if (!(c.meta.frame_rate > 0)) fail("meta.json: frame_rate must be positive");
    const auto count = meta.at("frame_count").get<long long>();
    if (count < 1) fail("meta.json: frame_count must be >= 1");
    c.meta.frame_count = std::size_t(std::max<long long>(count, 0));
    const json& units = meta.at("units");
    if (units.value("length", "") != "m" || units.value("angle", "") != "rad") {
      fail("meta.json: units must be {\"length\": \"m\", \"angle\": \"rad\"}");
    }
  } catch (const std::exception& e) {
    fail(std::string("meta.json: ") + e.what());
    return;
  }
  if (stop_early && !problems.empty()) return;

  try {
    poses = detail::ReadJsonFile<InvalidContainer>(dir / "poses.json");
    const json& frames = poses.at("frames");
    if (!frames.is_array()) throw std::invalid_argument("\"frames\" must be an array");
    for (const json& f : frames) {
      c.trajectory.ee_poses.push_back(detail::PoseFromJson(f));
      c.trajectory.gripper_fractions.push_back(f.at("gripper").get<double>());
      c.trajectory.actions.push_back(f.contains("action") ? f["action"].dump() : "null");
    }
    if (frames.size() != c.meta.frame_count) {
      fail("poses.json: " + std::to_string(frames.size()) + " poses for frame_count " +
           std::to_string(c.meta.frame_count));
    }
  } catch (const std::exception& e) {
    fail(std::string("poses.json: ") + e.what());
    return;
  }
  for (std::size_t i = 0; i < c.trajectory.gripper_fractions.size(); ++i) {
    const double g = c.trajectory.gripper_fractions[i];
    if (!(g >= 0 && g <= 1)) fail("poses.json: gripper fraction out of [0, 1] at frame " + std::to_string(i));
  }
  if (stop_early && !problems.empty()) return;

  auto check_sequence = [&](const fs::path& sub, const char* what) {
    if (!fs::is_directory(sub)) {
      fail(std::string(what) + ": missing directory");
      return;
    }
    const std::size_t n = CountPngs(sub);
    if (n != c.meta.frame_count) {
      fail(std::string(what) + ": " + std::to_string(n) + " images for frame_count " +
           std::to_string(c.meta.frame_count));
    }
    for (std::size_t i = 0; i < c.meta.frame_count; ++i) {
      const fs::path p = sub / FrameFileName(i);
      if (!fs::exists(p)) {
        fail(std::string(what) + ": missing " + p.filename().string());
        if (stop_early) return;
        continue;
      }
      try {
        const auto [w, h] = PngSize(p);
        if (w != c.meta.camera.width || h != c.meta.camera.height) {
          fail(std::string(what) + ": " + p.filename().string() + " is " + std::to_string(w) + "x" +
               std::to_string(h) + ", camera is " + std::to_string(c.meta.camera.width) + "x" +
               std::to_string(c.meta.camera.height));
        }
      } catch (const ImageIoError& e) {
        fail(std::string(what) + ": " + e.what());
      }
      if (stop_early && !problems.empty()) return;
    }
  };
  check_sequence(dir / "frames", "frames");
  for (std::size_t i = 0; i < c.meta.frame_count; ++i) c.trajectory.frames.push_back(c.frame_path(i));
  c.has_learned_masks = fs::is_directory(dir / "masks_learned");
  if (c.has_learned_masks) check_sequence(dir / "masks_learned", "masks_learned");
}

}  // namespace

Container ReadContainer(const fs::path& dir) {
  Container c;
  std::vector<std::string> problems;
  Inspect(dir, c, problems, true);
  if (!problems.empty()) throw InvalidContainer(dir.string() + ": " + problems.front());
  return c;
}

std::vector<std::string> ValidateContainer(const fs::path& dir) {
  Container c;
  std::vector<std::string> problems;
  Inspect(dir, c, problems, false);
  return problems;
}

void WriteContainerMetadata(const fs::path& dir, const ContainerMeta& meta, const Trajectory& traj) {
  fs::create_directories(dir);
  json m = {{"schema_version", meta.schema_version},
            {"robot", meta.robot},
            {"camera", CameraToJson(meta.camera)},
            {"source_base", detail::PoseToJson(meta.source_base)},
            {"frame_rate", meta.frame_rate},
            {"frame_count", meta.frame_count},
            {"units", {{"length", "m"}, {"angle", "rad"}}}};
  detail::WriteJsonFile(dir / "meta.json", m);
  json frames = json::array();
  for (std::size_t i = 0; i < traj.horizon(); ++i) {
    json f = detail::PoseToJson(traj.ee_poses[i]);
    f["gripper"] = traj.gripper_fractions[i];
    const std::string& a = i < traj.actions.size() ? traj.actions[i] : std::string();
    f["action"] = a.empty() ? json(nullptr) : json::parse(a);
    frames.push_back(std::move(f));
  }
  detail::WriteJsonFile(dir / "poses.json", json{{"frames", frames}});
}

std::vector<RgbImage> ReadFrames(const Container& c) {
  std::vector<RgbImage> out;
  out.reserve(c.meta.frame_count);
  for (std::size_t i = 0; i < c.meta.frame_count; ++i) out.push_back(ReadRgbPng(c.frame_path(i)));
  return out;
}

std::vector<BinaryMask> ReadMaskSequence(const fs::path& dir, std::size_t count) {
  std::vector<BinaryMask> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(ReadMaskPng(dir / FrameFileName(i)));
  return out;
}

namespace {

// Replaces `dir` with a fresh directory so stale files from an earlier run
// never survive.
void ResetDirectory(const fs::path& dir) {
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir, ec);
  if (ec) throw OutputWriteError("cannot create " + dir.string() + ": " + ec.message());
}

}  // namespace

void WriteMaskSequence(const fs::path& dir, const std::vector<BinaryMask>& masks) {
  ResetDirectory(dir);
  for (std::size_t i = 0; i < masks.size(); ++i) WritePng(masks[i], dir / FrameFileName(i));
}

void WriteFrameSequence(const fs::path& dir, const std::vector<RgbImage>& frames) {
  ResetDirectory(dir);
  for (std::size_t i = 0; i < frames.size(); ++i) WritePng(frames[i], dir / FrameFileName(i));
}

std::vector<fs::path> DiscoverContainers(const fs::path& root) {
  if (fs::exists(root / "meta.json")) return {root};
  std::vector<fs::path> out;
  if (!fs::is_directory(root)) return out;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory() && fs::exists(e.path() / "meta.json")) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace crosspaint
