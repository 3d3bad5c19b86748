#pragma once

#include <unistd.h>

#include <filesystem>
#include <map>
#include <mutex>
#include <string>

#include "crosspaint/kinematics.hpp"
#include "crosspaint/rng.hpp"

namespace crosspaint::testing {

inline std::string RobotPath(const std::string& name) {
  return std::string(CROSSPAINT_ROBOTS_DIR) + "/" + name + ".urdf";
}

inline const RobotModel& Robot(const std::string& name) {
  static std::map<std::string, RobotModel> cache;
  static std::mutex mu;
  std::lock_guard lock(mu);
  auto it = cache.find(name);
  if (it == cache.end()) {
    it = cache.emplace(name, LoadRobotDescription(RobotPath(name))).first;
  }
  return it->second;
}

inline JointConfig RandomConfig(const RobotModel& m, Rng& rng) {
  const JointConfig lo = m.LowerLimits(), hi = m.UpperLimits();
  JointConfig q(lo.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) q[i] = rng.Uniform(lo[i], hi[i]);
  return q;
}

inline RigidTransform RandomTransform(Rng& rng, double extent = 1.0) {
  const Vec3 axis(rng.Uniform(-1, 1), rng.Uniform(-1, 1), rng.Uniform(-1, 1) + 1e-3);
  return RigidTransform::FromAxisAngle(
      axis, rng.Uniform(-3.1, 3.1),
      Vec3(rng.Uniform(-extent, extent), rng.Uniform(-extent, extent),
           rng.Uniform(-extent, extent)));
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("crosspaint_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter()++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::filesystem::path path_;
};

}  // namespace crosspaint::testing
