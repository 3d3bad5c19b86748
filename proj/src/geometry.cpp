#include "crosspaint/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace crosspaint {

namespace {

Quat Canonical(Quat q) {
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  return q;
}

}  // namespace

RigidTransform::RigidTransform(const Quat& rotation, const Vec3& translation)
    : rotation_(Canonical(rotation)), translation_(translation) {}

RigidTransform RigidTransform::FromTranslation(const Vec3& t) {
  return RigidTransform(Quat::Identity(), t);
}

RigidTransform RigidTransform::FromAxisAngle(const Vec3& axis, double angle,
                                             const Vec3& t) {
  return RigidTransform(Quat(Eigen::AngleAxisd(angle, axis.normalized())), t);
}

RigidTransform RigidTransform::FromRpy(double roll, double pitch, double yaw,
                                       const Vec3& t) {
  const Quat q = Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
                 Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                 Eigen::AngleAxisd(roll, Vec3::UnitX());
  return RigidTransform(q, t);
}

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const {
  return RigidTransform(rotation_ * rhs.rotation_,
                        rotation_matrix() * rhs.translation_ + translation_);
}

Vec3 RigidTransform::operator*(const Vec3& point) const {
  return rotation_matrix() * point + translation_;
}

RigidTransform RigidTransform::inverse() const {
  const Quat inv = rotation_.conjugate();
  return RigidTransform(inv, -(inv.toRotationMatrix() * translation_));
}

RigidTransform RigidTransform::Relative(const RigidTransform& pose) const {
  const Quat inv = rotation_.conjugate();
  const Vec3 d = pose.translation_ - translation_;
  return RigidTransform(inv * pose.rotation_, inv.toRotationMatrix() * d);
}

bool RigidTransform::IsApprox(const RigidTransform& other, double tol) const {
  return (translation_ - other.translation_).cwiseAbs().maxCoeff() <= tol &&
         RotationDistance(rotation_, other.rotation_) <= tol;
}

double RotationDistance(const Quat& a, const Quat& b) {
  // |<a, b>| = cos(theta / 2); atan2 form keeps precision near zero.
  const Quat rel = a.conjugate() * b;
  const double s = rel.vec().norm();
  const double c = std::abs(rel.w());
  return 2.0 * std::atan2(s, c);
}

Vec3 RotationError(const Quat& a, const Quat& b) {
  Quat rel = a * b.conjugate();
  if (rel.w() < 0.0) rel.coeffs() = -rel.coeffs();
  const double s = rel.vec().norm();
  if (s < 1e-12) return 2.0 * rel.vec();
  const double angle = 2.0 * std::atan2(s, rel.w());
  return rel.vec() * (angle / s);
}

}  // namespace crosspaint
