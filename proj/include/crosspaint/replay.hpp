#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "crosspaint/geometry.hpp"
#include "crosspaint/kinematics.hpp"

namespace crosspaint {

// One demonstration: per-frame observation, gripper control-point pose in the
// world frame, gripper open fraction (0 closed, 1 open) and an opaque action
// record carried through untouched.
struct Trajectory {
  std::string id;
  std::vector<std::filesystem::path> frames;
  std::vector<RigidTransform> ee_poses;
  std::vector<double> gripper_fractions;
  std::vector<std::string> actions;  // serialized, opaque

  std::size_t horizon() const { return ee_poses.size(); }
  // Throws EmptyTrajectory, LengthMismatch or FractionOutOfRange. `frames`
  // may be empty for in-memory trajectories.
  void Validate() const;
};

struct BaseTuningParams {
  double initial_delta_m = 0.10;
  double error_cutoff_m = 0.01;
  int max_iterations = 20;
  double min_delta_m = 1e-4;

  void Validate() const;
};

struct BaseTuningResult {
  RigidTransform base_pose;
  double max_error_m = 0.0;
  int iterations_used = 0;
  bool feasible = false;
  Vec3 base_translation_delta = Vec3::Zero();
  // Max error at the current base after the initial check and after every
  // iteration; non-increasing.
  std::vector<double> error_trace;
};

struct ReplayResult {
  std::vector<JointConfig> joint_configs;
  std::vector<double> per_frame_pos_error_m;
  std::vector<double> per_frame_rot_error_rad;
  double max_pos_error_m = 0.0;
  std::vector<std::vector<double>> gripper_configs;
};

// T = target_base * source_base^-1: maps a pose expressed in the source world
// frame into the target world frame.
RigidTransform AlignSourceFrame(const RigidTransform& source_base,
                                const RigidTransform& target_base);

// Solves IK waypoint by waypoint, warm-starting each from the previous
// solution (waypoint 0 from the joint mid-range).
ReplayResult ReplayTrajectory(const RobotModel& model,
                              const RigidTransform& base,
                              const Trajectory& traj, const IkParams& ik);

// Greedy neighborhood descent over base translations: try +-delta along
// x, y, z (world axes, order +x -x +y -y +z -z, first minimum wins), move to
// the best strictly improving neighbor, otherwise halve delta. Stops once the
// max replay position error is below the cutoff, delta drops below
// min_delta, or max_iterations is reached. Base rotation is never changed.
BaseTuningResult TuneBase(const RobotModel& model, const Trajectory& traj,
                          const RigidTransform& initial_base,
                          const BaseTuningParams& params, const IkParams& ik);

enum class TrajectoryDisposition { kAccepted, kDiscarded };

TrajectoryDisposition ClassifyTrajectory(const BaseTuningResult& result);

// Finger joint values for an open fraction; the same fraction drives every
// jaw. Throws FractionOutOfRange outside [0, 1].
std::vector<double> MapGripper(double fraction, const GripperSpec& gripper);

}  // namespace crosspaint
