#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "crosspaint/geometry.hpp"
#include "crosspaint/mesh.hpp"

namespace crosspaint {

enum class JointKind { kRevolute, kPrismatic, kFixed };

struct JointSpec {
  std::string name;
  JointKind kind = JointKind::kFixed;
  Vec3 axis = Vec3::UnitZ();
  RigidTransform origin;  // parent link frame -> joint frame
  double limit_lo = 0.0;  // rad or m
  double limit_hi = 0.0;
  std::string parent_link;
  std::string child_link;

  bool movable() const { return kind != JointKind::kFixed; }
  // Joint frame motion for joint value `q`.
  RigidTransform Motion(double q) const;
};

// One jaw of the gripper: a joint hanging off a chain link that is not part
// of the serial arm chain.
struct FingerJoint {
  JointSpec joint;
  std::size_t parent_link = 0;  // index into RobotModel::links
  std::size_t link = 0;         // index of the finger's own link
  double closed = 0.0;
  double open = 0.0;
};

struct GripperSpec {
  int jaw_count = 0;
  std::vector<FingerJoint> fingers;
};

using Rgb = std::array<std::uint8_t, 3>;

struct LinkVisual {
  std::size_t link = 0;
  RigidTransform attach;  // link frame -> mesh frame
  std::shared_ptr<const LazyMesh> mesh;
  Rgb albedo{180, 180, 180};
};

// Joint values for the movable chain joints, base to flange.
using JointConfig = Eigen::VectorXd;

// Serial arm with optional gripper. Link 0 is the root; chain joint i moves
// link i+1 relative to link i. Finger links follow the chain links.
struct RobotModel {
  std::string name;
  std::vector<std::string> links;
  std::vector<JointSpec> chain;
  RigidTransform tool_offset;  // flange -> gripper control point
  std::optional<GripperSpec> gripper;
  std::vector<LinkVisual> visuals;

  std::size_t dof() const;
  std::size_t flange_link() const { return chain.size(); }
  JointConfig MidRange() const;
  JointConfig Clamp(JointConfig q) const;
  bool WithinLimits(const JointConfig& q) const;
  // Lower/upper bounds of the movable joints, in config order.
  JointConfig LowerLimits() const;
  JointConfig UpperLimits() const;
};

// Parses the supported URDF subset:
//   <robot name>
//   <link name> with optional <visual> (origin, geometry mesh|box|cylinder,
//       material color rgba)
//   <joint name type=revolute|prismatic|fixed> with parent, child, origin,
//       axis, limit lower/upper
//   <tool_frame xyz rpy/>                         (flange -> control point)
//   <gripper jaws="2|3"><finger joint closed open/>...</gripper>
// Joints named by <finger> are the jaws and are excluded from the serial
// chain. Relative mesh filenames resolve against `base_dir`.
RobotModel ParseRobotDescription(const std::string& text,
                                 const std::string& base_dir = ".");
RobotModel LoadRobotDescription(const std::string& path);

struct FkResult {
  std::vector<RigidTransform> links;  // world transform of every link
  RigidTransform end_effector;
};

FkResult ForwardKinematics(const RobotModel& model, const JointConfig& q,
                           const RigidTransform& base);

// Chain-only FK returning the control-point pose; skips finger links.
RigidTransform EndEffectorPose(const RobotModel& model, const JointConfig& q,
                               const RigidTransform& base);

// World transforms of all links including fingers at `finger_values`
// (one per finger, empty means each finger at its closed value).
FkResult ForwardKinematics(const RobotModel& model, const JointConfig& q,
                           const RigidTransform& base,
                           const std::vector<double>& finger_values);

// 6 x dof world-frame geometric Jacobian; rows 0-2 linear, rows 3-5 angular.
Eigen::Matrix<double, 6, Eigen::Dynamic> Jacobian(const RobotModel& model,
                                                  const JointConfig& q,
                                                  const RigidTransform& base);

struct IkParams {
  double damping = 0.05;
  int max_iterations = 200;
  double pos_tol = 5e-4;            // m
  double rot_tol = 0.00349065850;   // rad (0.2 deg)
  // Task-space error fed to one step is clipped to these norms; large
  // errors otherwise throw the linearization far outside its valid range.
  double max_position_step = 0.1;   // m
  double max_rotation_step = 0.5;   // rad
};

struct IkResult {
  JointConfig config;
  double position_error_m = 0.0;
  double orientation_error_rad = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Damped least squares: dq = J^T (J J^T + lambda^2 I)^-1 e, clamped to the
// joint limits after every step. Returns the best iterate seen.
IkResult SolveIk(const RobotModel& model, const RigidTransform& target,
                 const JointConfig& seed, const RigidTransform& base,
                 const IkParams& params);

}  // namespace crosspaint
