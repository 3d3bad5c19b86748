#pragma once

// JSON encodings shared by the container, config and report writers.

#include <fstream>
#include <string>

#include "json.hpp"

#include "crosspaint/errors.hpp"
#include "crosspaint/geometry.hpp"

namespace crosspaint::detail {

using nlohmann::json;

inline json PoseToJson(const RigidTransform& t) {
  const Quat& q = t.rotation();
  const Vec3& p = t.translation();
  return {{"q", {q.w(), q.x(), q.y(), q.z()}}, {"t", {p.x(), p.y(), p.z()}}};
}

inline Vec3 Vec3FromJson(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline RigidTransform PoseFromJson(const json& j) {
  const json& q = j.at("q");
  if (!q.is_array() || q.size() != 4) throw std::invalid_argument("expected quaternion [w, x, y, z]");
  Quat quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>());
  const double n = quat.norm();
  if (!(n > 0.5 && n < 1.5)) throw std::invalid_argument("quaternion is far from unit length");
  quat.normalize();
  return RigidTransform(quat, Vec3FromJson(j.at("t")));
}

template <typename E>
json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw E("cannot open " + path.string());
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw E(path.string() + ": " + e.what());
  }
}

// Pretty-printed with a trailing newline; bytes depend only on content.
inline void WriteJsonFile(const std::filesystem::path& path, const json& j) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw OutputWriteError("cannot write " + path.string());
  f << j.dump(2) << '\n';
  if (!f) throw OutputWriteError("failed writing " + path.string());
}

}  // namespace crosspaint::detail
