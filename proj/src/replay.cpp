#include "crosspaint/replay.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "crosspaint/errors.hpp"

namespace crosspaint {

void Trajectory::Validate() const {
  const std::size_t h = ee_poses.size();
  if (h == 0) throw EmptyTrajectory("trajectory '" + id + "' has no frames");
  if (gripper_fractions.size() != h || actions.size() != h ||
      (!frames.empty() && frames.size() != h)) {
    throw LengthMismatch("trajectory '" + id + "' has inconsistent array lengths");
  }
  for (double f : gripper_fractions) {
    if (!(f >= 0.0 && f <= 1.0)) {
      throw FractionOutOfRange("trajectory '" + id + "' gripper fraction " +
                               std::to_string(f) + " outside [0, 1]");
    }
  }
}

void BaseTuningParams::Validate() const {
  if (!(initial_delta_m > 0 && error_cutoff_m > 0 && max_iterations > 0 &&
        min_delta_m > 0 && min_delta_m < initial_delta_m)) {
    throw ConfigError("base tuning parameters must be positive with "
                      "min_delta < initial_delta");
  }
}

RigidTransform AlignSourceFrame(const RigidTransform& source_base,
                                const RigidTransform& target_base) {
  return target_base * source_base.inverse();
}

namespace {

// Replays poses already expressed in the robot base frame. Stops early once
// the running max position error reaches `abort_at`; the returned max is then
// only a lower bound.
ReplayResult ReplayLocal(const RobotModel& model,
                         const std::vector<RigidTransform>& targets,
                         const IkParams& ik,
                         double abort_at = std::numeric_limits<double>::infinity()) {
  ReplayResult out;
  out.joint_configs.reserve(targets.size());
  out.per_frame_pos_error_m.reserve(targets.size());
  out.per_frame_rot_error_rad.reserve(targets.size());
  JointConfig seed = model.MidRange();
  const RigidTransform identity;
  for (const auto& target : targets) {
    IkResult r = SolveIk(model, target, seed, identity, ik);
    out.max_pos_error_m = std::max(out.max_pos_error_m, r.position_error_m);
    out.per_frame_pos_error_m.push_back(r.position_error_m);
    out.per_frame_rot_error_rad.push_back(r.orientation_error_rad);
    seed = r.config;
    out.joint_configs.push_back(std::move(r.config));
    if (out.max_pos_error_m >= abort_at) break;
  }
  return out;
}

}  // namespace

ReplayResult ReplayTrajectory(const RobotModel& model,
                              const RigidTransform& base,
                              const Trajectory& traj, const IkParams& ik) {
  if (traj.horizon() == 0) {
    throw EmptyTrajectory("trajectory '" + traj.id + "' has no frames");
  }
  std::vector<RigidTransform> local;
  local.reserve(traj.horizon());
  for (const auto& p : traj.ee_poses) local.push_back(base.Relative(p));
  ReplayResult out = ReplayLocal(model, local, ik);
  if (model.gripper) {
    for (std::size_t t = 0; t < traj.horizon(); ++t) {
      const double f = t < traj.gripper_fractions.size() ? traj.gripper_fractions[t] : 0.0;
      out.gripper_configs.push_back(MapGripper(f, *model.gripper));
    }
  } else {
    out.gripper_configs.assign(traj.horizon(), {});
  }
  return out;
}

BaseTuningResult TuneBase(const RobotModel& model, const Trajectory& traj,
                          const RigidTransform& initial_base,
                          const BaseTuningParams& params, const IkParams& ik) {
  if (traj.horizon() == 0) {
    throw EmptyTrajectory("trajectory '" + traj.id + "' has no frames");
  }
  params.Validate();

  // Targets relative to the initial base. A world-axis offset o then moves
  // each local target by -R^T o; subtracting after the relative transform
  // keeps the search invariant to a joint translation of base and poses.
  std::vector<RigidTransform> local;
  local.reserve(traj.horizon());
  for (const auto& p : traj.ee_poses) local.push_back(initial_base.Relative(p));
  const Mat3 rt = initial_base.rotation_matrix().transpose();

  std::vector<RigidTransform> shifted(local.size());
  auto evaluate = [&](const Vec3& offset, double abort_at) {
    const Vec3 d = rt * offset;
    for (std::size_t i = 0; i < local.size(); ++i) {
      shifted[i] = RigidTransform(local[i].rotation(), local[i].translation() - d);
    }
    return ReplayLocal(model, shifted, ik, abort_at).max_pos_error_m;
  };

  static const std::array<Vec3, 6> kDirections = {
      Vec3::UnitX(), -Vec3::UnitX(), Vec3::UnitY(),
      -Vec3::UnitY(), Vec3::UnitZ(), -Vec3::UnitZ()};

  BaseTuningResult result;
  Vec3 offset = Vec3::Zero();
  double delta = params.initial_delta_m;
  double current = evaluate(offset, std::numeric_limits<double>::infinity());
  result.error_trace.push_back(current);
  int iterations = 0;

  while (current >= params.error_cutoff_m && iterations < params.max_iterations &&
         delta >= params.min_delta_m) {
    ++iterations;
    double best = current;
    int best_dir = -1;
    for (int k = 0; k < 6; ++k) {
      // A candidate whose running max reaches `best` can neither improve
      // strictly nor win a tie against an earlier direction.
      const double e = evaluate(offset + kDirections[k] * delta, best);
      if (e < best) {
        best = e;
        best_dir = k;
      }
    }
    if (best_dir >= 0) {
      offset += kDirections[best_dir] * delta;
      current = best;
    } else {
      delta *= 0.5;
    }
    result.error_trace.push_back(current);
  }

  result.max_error_m = current;
  result.iterations_used = iterations;
  result.feasible = current < params.error_cutoff_m;
  result.base_translation_delta = offset;
  result.base_pose =
      RigidTransform(initial_base.rotation(), initial_base.translation() + offset);
  return result;
}

TrajectoryDisposition ClassifyTrajectory(const BaseTuningResult& result) {
  return result.feasible ? TrajectoryDisposition::kAccepted
                         : TrajectoryDisposition::kDiscarded;
}

std::vector<double> MapGripper(double fraction, const GripperSpec& gripper) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw FractionOutOfRange("gripper fraction " + std::to_string(fraction) +
                             " outside [0, 1]");
  }
  std::vector<double> values;
  values.reserve(gripper.fingers.size());
  for (const auto& f : gripper.fingers) {
    values.push_back(f.closed + fraction * (f.open - f.closed));
  }
  return values;
}

}  // namespace crosspaint
