#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "crosspaint/kinematics.hpp"
#include "crosspaint/replay.hpp"
#include "crosspaint/rng.hpp"

namespace crosspaint::synth {

// Sum-of-sinusoids joint path around `center`, clamped to the limits.
// `amplitude` is the peak deviation per joint in joint units.
std::vector<JointConfig> SmoothJointPath(const RobotModel& model,
                                         const JointConfig& center, int frames,
                                         double amplitude, Rng& rng);

// Gripper fractions that open and close smoothly once over the clip.
std::vector<double> SmoothGripperFractions(int frames, Rng& rng);

// Trajectory whose end-effector poses are FK of `path` at `base`.
Trajectory TrajectoryFromJointPath(const std::string& id,
                                   const RobotModel& model,
                                   const RigidTransform& base,
                                   const std::vector<JointConfig>& path,
                                   const std::vector<double>& gripper);

// Same trajectory with every pose translated by `offset`.
Trajectory Translated(const Trajectory& traj, const Vec3& offset);

}  // namespace crosspaint::synth

#include "crosspaint/container.hpp"

namespace crosspaint::synth {

// Smooth procedural tabletop: wall and table gradients, gentle texture and a
// few flat-shaded objects.
RgbImage SceneImage(int width, int height, Rng& rng);

// Camera looking at the workspace in front of a base at the origin from the
// front-right.
CameraModel WorkspaceCamera(int width, int height);

// A ready-to-work configuration for the bundled 6-joint arms, jittered.
JointConfig WorkPose(const RobotModel& model, Rng& rng);

struct MaskCorruption {
  double inner_dropout = 0.5;   // chance an inner boundary pixel is lost
  double outer_speckle = 0.05;  // chance an outer boundary pixel is added
  double gripper_hole_px = 14;  // radius of the missed region at the gripper
  double blob_radius_px = 9;
  double blob_min_distance_px = 40;  // clearance between blob and robot
};

// Imitates a learned segmenter's output for a true silhouette.
BinaryMask CorruptLearnedMask(const BinaryMask& truth, double gripper_u, double gripper_v,
                              const MaskCorruption& corruption, Rng& rng);

struct DatasetSpec {
  int clips = 3;
  int frames = 50;
  int width = 640;
  int height = 480;
  std::uint64_t seed = 1;
  double amplitude = 0.35;  // joint-space sway, rad
  bool learned_masks = true;
  // The stored camera's principal point is off by this much relative to the
  // camera that rendered the frames, so simulated masks come out shifted.
  int calibration_error_px = 0;
  // Where the robot really stood relative to the recorded source_base.
  Vec3 workspace_offset = Vec3::Zero();
  MaskCorruption corruption;
};

// Writes clip_000, clip_001, ... under `root` with `model` (registered as
// `robot_id`) as the source robot. Returns the container directories.
std::vector<std::filesystem::path> GenerateDataset(const std::filesystem::path& root,
                                                   const DatasetSpec& spec,
                                                   const RobotModel& model,
                                                   const std::string& robot_id);

}  // namespace crosspaint::synth
