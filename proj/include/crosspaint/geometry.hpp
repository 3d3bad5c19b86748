#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace crosspaint {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;
using Mat3 = Eigen::Matrix3d;

// SE(3) pose: unit quaternion plus translation in meters.
//
// The quaternion is normalized and sign-canonicalized (w >= 0) on every
// construction, so two transforms describing the same rotation compare
// equal component-wise.
class RigidTransform {
 public:
  RigidTransform() : rotation_(Quat::Identity()), translation_(Vec3::Zero()) {}
  RigidTransform(const Quat& rotation, const Vec3& translation);

  static RigidTransform Identity() { return {}; }
  static RigidTransform FromTranslation(const Vec3& t);
  static RigidTransform FromAxisAngle(const Vec3& axis, double angle,
                                      const Vec3& t = Vec3::Zero());
  // URDF convention: fixed-axis roll (x), pitch (y), yaw (z).
  static RigidTransform FromRpy(double roll, double pitch, double yaw,
                                const Vec3& t = Vec3::Zero());

  const Quat& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }
  Mat3 rotation_matrix() const { return rotation_.toRotationMatrix(); }

  RigidTransform operator*(const RigidTransform& rhs) const;
  Vec3 operator*(const Vec3& point) const;
  RigidTransform inverse() const;

  // Express `pose` in the frame of *this: R^T (p - t), q^-1 q_p.
  // Subtraction happens before rotation so that jointly translating *this
  // and `pose` by an exactly representable vector leaves the result
  // bit-identical.
  RigidTransform Relative(const RigidTransform& pose) const;

  bool IsApprox(const RigidTransform& other, double tol) const;

 private:
  Quat rotation_;
  Vec3 translation_;
};

// Geodesic angle between two rotations, in [0, pi].
double RotationDistance(const Quat& a, const Quat& b);

// Log map of `a * b^-1` as a rotation vector (axis * angle), angle in [0, pi].
Vec3 RotationError(const Quat& a, const Quat& b);

}  // namespace crosspaint
