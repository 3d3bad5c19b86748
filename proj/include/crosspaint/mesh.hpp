#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "crosspaint/geometry.hpp"

namespace crosspaint {

// Triangle soup in link-local coordinates (meters).
struct MeshAsset {
  std::vector<Eigen::Vector3f> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;

  // Throws MeshLoadFailure if any index is out of range.
  void Validate() const;
};

// On-disk mesh formats. Both start with a 4-byte magic.
//
// Binary ("TMSH"), little-endian:
//   char[4]  magic = "TMSH"
//   uint32   vertex_count
//   uint32   triangle_count
//   float32  xyz * vertex_count
//   uint32   ijk * triangle_count      (0-based)
//
// ASCII ("tmsh-ascii"), whitespace separated:
//   tmsh-ascii <vertex_count> <triangle_count>
//   x y z          (vertex_count lines)
//   i j k          (triangle_count lines, 0-based)
MeshAsset LoadMesh(const std::filesystem::path& path);
MeshAsset ParseMesh(const std::string& bytes, const std::string& origin);
void WriteMeshBinary(const MeshAsset& mesh, const std::filesystem::path& path);
void WriteMeshAscii(const MeshAsset& mesh, const std::filesystem::path& path);

// Closed primitive meshes centered on the origin.
MeshAsset MakeBox(const Vec3& size);
MeshAsset MakeCylinder(double radius, double length, int segments = 16);

// Deferred mesh geometry. The description parser records where geometry
// lives; the first Get() loads it. Thread-safe; a failed load rethrows
// MeshLoadFailure on every call.
class LazyMesh {
 public:
  explicit LazyMesh(std::filesystem::path path, Vec3 scale = Vec3::Ones());
  explicit LazyMesh(MeshAsset inline_mesh);

  const MeshAsset& Get() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  Vec3 scale_ = Vec3::Ones();
  mutable std::mutex mu_;
  mutable std::optional<MeshAsset> mesh_;
};

}  // namespace crosspaint
