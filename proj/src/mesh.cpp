#include "crosspaint/mesh.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "crosspaint/errors.hpp"

namespace crosspaint {

namespace {

constexpr char kBinaryMagic[4] = {'T', 'M', 'S', 'H'};
constexpr const char* kAsciiMagic = "tmsh-ascii";

std::uint32_t ReadU32(const std::string& bytes, std::size_t offset) {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + offset);
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
         std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

float ReadF32(const std::string& bytes, std::size_t offset) {
  const std::uint32_t bits = ReadU32(bytes, offset);
  float f;
  std::memcpy(&f, &bits, sizeof f);
  return f;
}

void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

void PutF32(std::string& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, sizeof bits);
  PutU32(out, bits);
}

MeshAsset ParseBinary(const std::string& bytes, const std::string& origin) {
  if (bytes.size() < 12) {
    throw MeshLoadFailure(origin + ": truncated header");
  }
  const std::uint64_t nv = ReadU32(bytes, 4);
  const std::uint64_t nt = ReadU32(bytes, 8);
  const std::uint64_t expected = 12 + nv * 12 + nt * 12;
  if (bytes.size() != expected) {
    throw MeshLoadFailure(origin + ": size " + std::to_string(bytes.size()) +
                          " does not match header (expected " +
                          std::to_string(expected) + ")");
  }
  MeshAsset mesh;
  mesh.vertices.resize(nv);
  mesh.triangles.resize(nt);
  std::size_t off = 12;
  for (auto& v : mesh.vertices) {
    for (int k = 0; k < 3; ++k, off += 4) v[k] = ReadF32(bytes, off);
  }
  for (auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k, off += 4) t[k] = ReadU32(bytes, off);
  }
  return mesh;
}

MeshAsset ParseAscii(const std::string& bytes, const std::string& origin) {
  std::istringstream in(bytes);
  std::string magic;
  long long nv = -1, nt = -1;
  in >> magic >> nv >> nt;
  if (!in || nv < 0 || nt < 0) {
    throw MeshLoadFailure(origin + ": bad ascii mesh header");
  }
  MeshAsset mesh;
  mesh.vertices.resize(std::size_t(nv));
  mesh.triangles.resize(std::size_t(nt));
  for (auto& v : mesh.vertices) in >> v[0] >> v[1] >> v[2];
  for (auto& t : mesh.triangles) in >> t[0] >> t[1] >> t[2];
  if (!in) throw MeshLoadFailure(origin + ": truncated ascii mesh body");
  return mesh;
}

}  // namespace

void MeshAsset::Validate() const {
  const auto n = vertices.size();
  for (const auto& t : triangles) {
    if (t[0] >= n || t[1] >= n || t[2] >= n) {
      throw MeshLoadFailure("triangle index out of range");
    }
  }
}

MeshAsset ParseMesh(const std::string& bytes, const std::string& origin) {
  MeshAsset mesh;
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kBinaryMagic, 4) == 0) {
    mesh = ParseBinary(bytes, origin);
  } else if (bytes.rfind(kAsciiMagic, 0) == 0) {
    mesh = ParseAscii(bytes, origin);
  } else {
    throw MeshLoadFailure(origin + ": unrecognized mesh magic");
  }
  try {
    mesh.Validate();
  } catch (const MeshLoadFailure& e) {
    throw MeshLoadFailure(origin + ": " + e.what());
  }
  return mesh;
}

MeshAsset LoadMesh(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MeshLoadFailure("cannot open mesh " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseMesh(ss.str(), path.string());
}

void WriteMeshBinary(const MeshAsset& mesh, const std::filesystem::path& path) {
  std::string out(kBinaryMagic, 4);
  PutU32(out, std::uint32_t(mesh.vertices.size()));
  PutU32(out, std::uint32_t(mesh.triangles.size()));
  for (const auto& v : mesh.vertices) {
    for (int k = 0; k < 3; ++k) PutF32(out, v[k]);
  }
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) PutU32(out, t[k]);
  }
  std::ofstream f(path, std::ios::binary);
  f.write(out.data(), std::streamsize(out.size()));
  if (!f) throw MeshLoadFailure("cannot write mesh " + path.string());
}

void WriteMeshAscii(const MeshAsset& mesh, const std::filesystem::path& path) {
  std::ofstream f(path);
  f << kAsciiMagic << ' ' << mesh.vertices.size() << ' '
    << mesh.triangles.size() << '\n';
  f.precision(9);
  for (const auto& v : mesh.vertices) {
    f << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
  }
  for (const auto& t : mesh.triangles) {
    f << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
  if (!f) throw MeshLoadFailure("cannot write mesh " + path.string());
}

MeshAsset MakeBox(const Vec3& size) {
  const Eigen::Vector3f h = (size * 0.5).cast<float>();
  MeshAsset m;
  for (int i = 0; i < 8; ++i) {
    m.vertices.emplace_back((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(),
                            (i & 4) ? h.z() : -h.z());
  }
  m.triangles = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6},
                 {0, 1, 4}, {1, 5, 4}, {2, 6, 3}, {3, 6, 7},
                 {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  return m;
}

MeshAsset MakeCylinder(double radius, double length, int segments) {
  MeshAsset m;
  const auto hz = float(length * 0.5);
  const auto n = std::uint32_t(segments);
  for (std::uint32_t i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * i / n;
    const auto x = float(radius * std::cos(a));
    const auto y = float(radius * std::sin(a));
    m.vertices.emplace_back(x, y, -hz);
    m.vertices.emplace_back(x, y, hz);
  }
  const std::uint32_t bottom = 2 * n, top = 2 * n + 1;
  m.vertices.emplace_back(0.f, 0.f, -hz);
  m.vertices.emplace_back(0.f, 0.f, hz);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t j = (i + 1) % n;
    m.triangles.push_back({2 * i, 2 * j, 2 * i + 1});
    m.triangles.push_back({2 * j, 2 * j + 1, 2 * i + 1});
    m.triangles.push_back({bottom, 2 * j, 2 * i});
    m.triangles.push_back({top, 2 * i + 1, 2 * j + 1});
  }
  return m;
}

LazyMesh::LazyMesh(std::filesystem::path path, Vec3 scale)
    : path_(std::move(path)), scale_(std::move(scale)) {}

LazyMesh::LazyMesh(MeshAsset inline_mesh) : mesh_(std::move(inline_mesh)) {}

const MeshAsset& LazyMesh::Get() const {
  std::lock_guard lock(mu_);
  if (!mesh_) {
    MeshAsset m = LoadMesh(path_);
    if (scale_ != Vec3::Ones()) {
      const Eigen::Vector3f s = scale_.cast<float>();
      for (auto& v : m.vertices) v = v.cwiseProduct(s);
    }
    mesh_ = std::move(m);
  }
  return *mesh_;
}

}  // namespace crosspaint
