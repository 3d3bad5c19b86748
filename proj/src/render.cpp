#include "crosspaint/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace crosspaint {

void CameraModel::Validate() const {
  if (!(fx > 0 && fy > 0)) throw ConfigError("camera focal lengths must be positive");
  if (width < 1 || height < 1) throw ConfigError("camera image size must be at least 1x1");
  if (!(near > 0 && near < far)) throw ConfigError("camera needs 0 < near < far");
}

std::optional<Projection> ProjectPoint(const CameraModel& camera, const Vec3& world) {
  const Vec3 p = camera.extrinsic * world;
  if (p.z() <= camera.near || p.z() >= camera.far) return std::nullopt;
  return Projection{camera.fx * p.x() / p.z() + camera.cx,
                    camera.fy * p.y() / p.z() + camera.cy, p.z()};
}

namespace {

constexpr int kSubpixelBits = 8;
constexpr double kSubpixelScale = 1 << kSubpixelBits;
constexpr std::int64_t kHalfPixel = std::int64_t(1) << (kSubpixelBits - 1);
// Snapped coordinates are clamped here; 2^40 px is far beyond any image.
constexpr double kCoordLimit = 1099511627776.0;

using Wide = __int128;

struct Fixed {
  std::int64_t x;
  std::int64_t y;
};

Wide Orient(const Fixed& a, const Fixed& b, std::int64_t px, std::int64_t py) {
  return Wide(b.x - a.x) * Wide(py - a.y) - Wide(b.y - a.y) * Wide(px - a.x);
}

bool TopLeft(const Fixed& a, const Fixed& b) {
  const std::int64_t dx = b.x - a.x, dy = b.y - a.y;
  return (dy == 0 && dx > 0) || dy < 0;
}

std::uint32_t PackColor(const Rgb& c) {
  return std::uint32_t(c[0]) << 16 | std::uint32_t(c[1]) << 8 | c[2];
}

// Light direction (towards the light) in camera coordinates: above-left of
// the camera.
const Vec3 kLight = Vec3(-0.3, -0.6, -1.0).normalized();
constexpr double kAmbient = 0.35;
constexpr double kDiffuse = 0.65;

class Rasterizer {
 public:
  explicit Rasterizer(const CameraModel& camera)
      : cam_(camera),
        out_{RgbImage(camera.width, camera.height), DepthImage(camera.width, camera.height),
             BinaryMask(camera.width, camera.height)},
        keys_(std::size_t(camera.width) * std::size_t(camera.height),
              std::numeric_limits<std::uint32_t>::max()) {}

  // Triangle in camera coordinates.
  void Draw(const std::array<Vec3, 3>& v, const Rgb& albedo) {
    if (v[0].z() >= cam_.far && v[1].z() >= cam_.far && v[2].z() >= cam_.far) return;
    const Vec3 n = (v[1] - v[0]).cross(v[2] - v[0]);
    const double nn = n.norm();
    if (nn == 0.0 || !std::isfinite(nn)) return;
    const Vec3 unit = n / nn;
    const double shade = kAmbient + kDiffuse * std::abs(unit.dot(kLight));
    Rgb color;
    for (int k = 0; k < 3; ++k) {
      color[k] = std::uint8_t(std::min(255.0, std::round(albedo[k] * shade)));
    }
    const Plane plane{unit, unit.dot(v[0])};

    // Sutherland-Hodgman against z = near.
    std::array<Vec3, 4> poly;
    int count = 0;
    for (int i = 0; i < 3; ++i) {
      const Vec3& a = v[i];
      const Vec3& b = v[(i + 1) % 3];
      const bool ain = a.z() >= cam_.near, bin = b.z() >= cam_.near;
      if (ain) poly[count++] = a;
      if (ain != bin) {
        const double t = (cam_.near - a.z()) / (b.z() - a.z());
        Vec3 p = a + t * (b - a);
        p.z() = cam_.near;
        poly[count++] = p;
      }
    }
    if (count < 3) return;
    for (int i = 1; i + 1 < count; ++i) {
      Fill({poly[0], poly[i], poly[i + 1]}, plane, PackColor(color), color);
    }
  }

  RenderOutput Finish() && {
    for (std::size_t i = 0; i < out_.mask.bits.size(); ++i) {
      out_.mask.bits[i] = std::isfinite(out_.depth.depth[i]) ? 1 : 0;
    }
    return std::move(out_);
  }

 private:
  struct Plane {
    Vec3 normal;
    double offset;  // normal . X = offset
  };

  Fixed Snap(const Vec3& p) const {
    const double u = std::clamp(cam_.fx * p.x() / p.z() + cam_.cx, -kCoordLimit, kCoordLimit);
    const double v = std::clamp(cam_.fy * p.y() / p.z() + cam_.cy, -kCoordLimit, kCoordLimit);
    return {std::llround(u * kSubpixelScale), std::llround(v * kSubpixelScale)};
  }

  void Fill(const std::array<Vec3, 3>& tri, const Plane& plane, std::uint32_t key,
            const Rgb& color) {
    std::array<Fixed, 3> s = {Snap(tri[0]), Snap(tri[1]), Snap(tri[2])};
    Wide area = Orient(s[0], s[1], s[2].x, s[2].y);
    if (area == 0) return;
    if (area < 0) std::swap(s[1], s[2]);

    const std::int64_t min_x = std::min({s[0].x, s[1].x, s[2].x});
    const std::int64_t max_x = std::max({s[0].x, s[1].x, s[2].x});
    const std::int64_t min_y = std::min({s[0].y, s[1].y, s[2].y});
    const std::int64_t max_y = std::max({s[0].y, s[1].y, s[2].y});
    // Pixel i has its center at i * 256 + 128 in fixed point.
    auto first = [](std::int64_t lo) {
      const std::int64_t n = lo - kHalfPixel;
      return n <= 0 ? -((-n) >> kSubpixelBits) : ((n + (1 << kSubpixelBits) - 1) >> kSubpixelBits);
    };
    auto last = [](std::int64_t hi) {
      const std::int64_t n = hi - kHalfPixel;
      return n >= 0 ? (n >> kSubpixelBits) : -(((-n) + (1 << kSubpixelBits) - 1) >> kSubpixelBits);
    };
    const std::int64_t x0 = std::max<std::int64_t>(0, first(min_x));
    const std::int64_t x1 = std::min<std::int64_t>(cam_.width - 1, last(max_x));
    const std::int64_t y0 = std::max<std::int64_t>(0, first(min_y));
    const std::int64_t y1 = std::min<std::int64_t>(cam_.height - 1, last(max_y));
    if (x0 > x1 || y0 > y1) return;

    const bool tl0 = TopLeft(s[1], s[2]);
    const bool tl1 = TopLeft(s[2], s[0]);
    const bool tl2 = TopLeft(s[0], s[1]);

    for (std::int64_t y = y0; y <= y1; ++y) {
      const std::int64_t py = (y << kSubpixelBits) + kHalfPixel;
      const double dir_y = (double(y) + 0.5 - cam_.cy) / cam_.fy;
      for (std::int64_t x = x0; x <= x1; ++x) {
        const std::int64_t px = (x << kSubpixelBits) + kHalfPixel;
        const Wide w0 = Orient(s[1], s[2], px, py);
        if (w0 < 0 || (w0 == 0 && !tl0)) continue;
        const Wide w1 = Orient(s[2], s[0], px, py);
        if (w1 < 0 || (w1 == 0 && !tl1)) continue;
        const Wide w2 = Orient(s[0], s[1], px, py);
        if (w2 < 0 || (w2 == 0 && !tl2)) continue;

        const double dir_x = (double(x) + 0.5 - cam_.cx) / cam_.fx;
        const double denom =
            plane.normal.x() * dir_x + plane.normal.y() * dir_y + plane.normal.z();
        if (denom == 0.0) continue;
        const double z = plane.offset / denom;
        if (!(z > 0.0) || z >= cam_.far) continue;
        const float zf = float(z);
        const std::size_t idx = std::size_t(y) * std::size_t(cam_.width) + std::size_t(x);
        float& cur = out_.depth.depth[idx];
        if (zf < cur || (zf == cur && key < keys_[idx])) {
          cur = zf;
          keys_[idx] = key;
          std::uint8_t* px_rgb = out_.rgb.data.data() + 3 * idx;
          px_rgb[0] = color[0];
          px_rgb[1] = color[1];
          px_rgb[2] = color[2];
        }
      }
    }
  }

  const CameraModel& cam_;
  RenderOutput out_;
  std::vector<std::uint32_t> keys_;
};

}  // namespace

RenderOutput RasterizeTriangles(std::span<const WorldTriangle> triangles,
                                const CameraModel& camera) {
  camera.Validate();
  Rasterizer r(camera);
  for (const auto& t : triangles) {
    r.Draw({camera.extrinsic * t.vertices[0], camera.extrinsic * t.vertices[1],
            camera.extrinsic * t.vertices[2]},
           t.albedo);
  }
  return std::move(r).Finish();
}

RenderOutput RasterizeRobot(const RobotModel& model, const JointConfig& q,
                            const RigidTransform& base, const CameraModel& camera,
                            const std::vector<double>& finger_values) {
  camera.Validate();
  const FkResult fk = ForwardKinematics(model, q, base, finger_values);
  Rasterizer r(camera);
  for (const auto& visual : model.visuals) {
    const MeshAsset& mesh = visual.mesh->Get();
    const RigidTransform to_cam = camera.extrinsic * fk.links[visual.link] * visual.attach;
    const Mat3 rot = to_cam.rotation_matrix();
    const Vec3& trans = to_cam.translation();
    std::vector<Vec3> verts;
    verts.reserve(mesh.vertices.size());
    for (const auto& v : mesh.vertices) verts.push_back(rot * v.cast<double>() + trans);
    for (const auto& t : mesh.triangles) {
      r.Draw({verts[t[0]], verts[t[1]], verts[t[2]]}, visual.albedo);
    }
  }
  return std::move(r).Finish();
}

}  // namespace crosspaint
