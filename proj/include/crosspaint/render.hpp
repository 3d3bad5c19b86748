#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "crosspaint/geometry.hpp"
#include "crosspaint/image.hpp"
#include "crosspaint/kinematics.hpp"

namespace crosspaint {

// Pinhole camera without distortion. `extrinsic` maps world to camera
// coordinates; the camera looks along +z with +x right and +y down.
struct CameraModel {
  double fx = 500.0;
  double fy = 500.0;
  double cx = 320.0;
  double cy = 240.0;
  int width = 640;
  int height = 480;
  RigidTransform extrinsic;
  double near = 0.05;
  double far = 50.0;

  // Throws ConfigError on non-positive focal lengths, empty images or a
  // bad near/far range.
  void Validate() const;
};

struct Projection {
  double u = 0.0;
  double v = 0.0;
  double z = 0.0;  // camera-space depth, meters
};

// nullopt when the point is clipped (z <= near or z >= far).
std::optional<Projection> ProjectPoint(const CameraModel& camera, const Vec3& world);

struct RenderOutput {
  RgbImage rgb;
  DepthImage depth;
  BinaryMask mask;  // set exactly where depth is finite
};

struct WorldTriangle {
  std::array<Vec3, 3> vertices;
  Rgb albedo{200, 200, 200};
};

// Z-buffered rasterization of arbitrary triangles:
//  - coverage sampled at pixel centers (x + 0.5, y + 0.5) with the top-left
//    fill rule on vertices snapped to 1/256 px;
//  - depth is the exact ray/plane intersection at the pixel center;
//  - triangles crossing the near plane are clipped there;
//  - no back-face culling; flat Lambertian shading from one fixed
//    directional light plus ambient;
//  - equal depths resolve to the smaller packed color, so the result does not
//    depend on triangle order.
RenderOutput RasterizeTriangles(std::span<const WorldTriangle> triangles,
                                const CameraModel& camera);

// Renders every link visual of `model` at configuration `q`. `finger_values`
// positions the gripper jaws (empty: closed). Throws MeshLoadFailure when a
// referenced mesh cannot be loaded.
RenderOutput RasterizeRobot(const RobotModel& model, const JointConfig& q,
                            const RigidTransform& base, const CameraModel& camera,
                            const std::vector<double>& finger_values = {});

}  // namespace crosspaint
