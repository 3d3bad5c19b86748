#include <array>
#include <cmath>
#include <numbers>

#include "crosspaint/synth.hpp"

namespace crosspaint::synth {

std::vector<JointConfig> SmoothJointPath(const RobotModel& model,
                                         const JointConfig& center, int frames,
                                         double amplitude, Rng& rng) {
  const auto n = center.size();
  // Two harmonics per joint with random phase; frequencies are low enough
  // that neighboring frames stay close.
  std::vector<std::array<double, 4>> coeff(static_cast<std::size_t>(n));
  for (auto& c : coeff) {
    c = {rng.Uniform(0.3, 1.0), rng.Uniform(0, 2 * std::numbers::pi),
         rng.Uniform(0.0, 0.5), rng.Uniform(0, 2 * std::numbers::pi)};
  }
  std::vector<JointConfig> path;
  path.reserve(std::size_t(frames));
  for (int t = 0; t < frames; ++t) {
    const double s = frames > 1 ? double(t) / (frames - 1) : 0.0;
    JointConfig q = center;
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& c = coeff[std::size_t(j)];
      const double w = (c[0] * std::sin(std::numbers::pi * s + c[1]) +
                        c[2] * std::sin(2 * std::numbers::pi * s + c[3])) /
                       1.5;
      q[j] += amplitude * w;
    }
    path.push_back(model.Clamp(q));
  }
  return path;
}

std::vector<double> SmoothGripperFractions(int frames, Rng& rng) {
  const double phase = rng.Uniform(0, 2 * std::numbers::pi);
  std::vector<double> out;
  out.reserve(std::size_t(frames));
  for (int t = 0; t < frames; ++t) {
    const double s = frames > 1 ? double(t) / (frames - 1) : 0.0;
    out.push_back(0.5 + 0.5 * std::sin(2 * std::numbers::pi * s + phase));
  }
  return out;
}

Trajectory TrajectoryFromJointPath(const std::string& id,
                                   const RobotModel& model,
                                   const RigidTransform& base,
                                   const std::vector<JointConfig>& path,
                                   const std::vector<double>& gripper) {
  Trajectory traj;
  traj.id = id;
  for (std::size_t t = 0; t < path.size(); ++t) {
    traj.ee_poses.push_back(EndEffectorPose(model, path[t], base));
    traj.gripper_fractions.push_back(t < gripper.size() ? gripper[t] : 0.0);
    traj.actions.push_back("{\"t\":" + std::to_string(t) + "}");
  }
  return traj;
}

Trajectory Translated(const Trajectory& traj, const Vec3& offset) {
  Trajectory out = traj;
  for (auto& p : out.ee_poses) {
    p = RigidTransform(p.rotation(), p.translation() + offset);
  }
  return out;
}

}  // namespace crosspaint::synth
