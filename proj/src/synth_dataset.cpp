#include <cmath>
#include <numbers>

#include "crosspaint/composite.hpp"
#include "crosspaint/maskfusion.hpp"
#include "crosspaint/synth.hpp"

namespace crosspaint::synth {

namespace fs = std::filesystem;

RgbImage SceneImage(int width, int height, Rng& rng) {
  RgbImage img(width, height);
  const double horizon = height * rng.Uniform(0.35, 0.5);
  const std::array<double, 3> wall = {rng.Uniform(150, 210), rng.Uniform(150, 210), rng.Uniform(150, 210)};
  const std::array<double, 3> table = {rng.Uniform(90, 160), rng.Uniform(70, 120), rng.Uniform(40, 90)};
  const double fx = rng.Uniform(1.5, 4.0) / width, fy = rng.Uniform(1.5, 4.0) / height;
  const double phase = rng.Uniform(0, 2 * std::numbers::pi);
  struct Object {
    double cx, cy, rx, ry;
    std::array<double, 3> color;
  };
  std::vector<Object> objects;
  const int n = rng.UniformInt(3, 5);
  for (int k = 0; k < n; ++k) {
    objects.push_back({rng.Uniform(0.1, 0.9) * width, rng.Uniform(horizon + 10, height - 10),
                       rng.Uniform(0.03, 0.08) * width, rng.Uniform(0.03, 0.06) * height,
                       {rng.Uniform(30, 230), rng.Uniform(30, 230), rng.Uniform(30, 230)}});
  }
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const bool on_table = y >= horizon;
      const auto& base = on_table ? table : wall;
      const double shade = on_table ? 0.8 + 0.4 * (y - horizon) / (height - horizon)
                                    : 1.05 - 0.25 * y / std::max(1.0, horizon);
      const double texture = 6.0 * std::sin(fx * 2 * std::numbers::pi * x + phase) *
                             std::cos(fy * 2 * std::numbers::pi * y);
      std::array<double, 3> c;
      for (int i = 0; i < 3; ++i) c[i] = base[i] * shade + texture;
      for (const auto& o : objects) {
        const double dx = (x - o.cx) / o.rx, dy = (y - o.cy) / o.ry;
        const double r2 = dx * dx + dy * dy;
        if (r2 <= 1.0) {
          for (int i = 0; i < 3; ++i) c[i] = o.color[i] * (1.0 - 0.3 * r2);
        }
      }
      for (int i = 0; i < 3; ++i) img.at(x, y)[i] = std::uint8_t(std::clamp(std::lround(c[i]), 0L, 255L));
    }
  }
  return img;
}

CameraModel WorkspaceCamera(int width, int height) {
  CameraModel cam;
  cam.width = width;
  cam.height = height;
  cam.fx = cam.fy = 0.8 * width;
  cam.cx = width / 2.0;
  cam.cy = height / 2.0;
  const Vec3 eye(1.55, -1.35, 1.05), at(0.35, 0.0, 0.3);
  const Vec3 fwd = (at - eye).normalized();
  const Vec3 right = fwd.cross(Vec3::UnitZ()).normalized();
  const Vec3 down = fwd.cross(right);
  Mat3 r;
  r.row(0) = right;
  r.row(1) = down;
  r.row(2) = fwd;
  cam.extrinsic = RigidTransform(Quat(r), -(r * eye));
  return cam;
}

JointConfig WorkPose(const RobotModel& model, Rng& rng) {
  if (model.dof() != 6) return model.MidRange();
  JointConfig q(6);
  q << rng.Uniform(-0.7, 0.7), rng.Uniform(0.4, 0.8), rng.Uniform(1.0, 1.5),
      rng.Uniform(-0.5, 0.5), rng.Uniform(0.4, 0.9), rng.Uniform(-0.5, 0.5);
  return model.Clamp(q);
}

BinaryMask CorruptLearnedMask(const BinaryMask& truth, double gripper_u, double gripper_v,
                              const MaskCorruption& corruption, Rng& rng) {
  BinaryMask out = truth;
  const int w = truth.width, h = truth.height;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool inner_edge = false, outer_edge = false;
      for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        if (!truth.in_bounds(x + dx, y + dy)) continue;
        const bool n = truth.get(x + dx, y + dy);
        if (truth.get(x, y) && !n) inner_edge = true;
        if (!truth.get(x, y) && n) outer_edge = true;
      }
      if (inner_edge && rng.Uniform() < corruption.inner_dropout) out.set(x, y, false);
      if (outer_edge && rng.Uniform() < corruption.outer_speckle) out.set(x, y, true);
    }
  }
  const double hole2 = corruption.gripper_hole_px * corruption.gripper_hole_px;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if ((x - gripper_u) * (x - gripper_u) + (y - gripper_v) * (y - gripper_v) <= hole2) out.set(x, y, false);

  if (truth.count() > 0) {
    const DistanceField dt = DistanceTransform(truth);
    const double r = corruption.blob_radius_px;
    for (int attempt = 0; attempt < 200; ++attempt) {
      const int cx = rng.UniformInt(int(r), w - 1 - int(r)), cy = rng.UniformInt(int(r), h - 1 - int(r));
      if (dt.at(cx, cy) < corruption.blob_min_distance_px + r) continue;
      for (int y = cy - int(r); y <= cy + int(r); ++y)
        for (int x = cx - int(r); x <= cx + int(r); ++x)
          if (out.in_bounds(x, y) && (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) out.set(x, y);
      break;
    }
  }
  return out;
}

std::vector<fs::path> GenerateDataset(const fs::path& root, const DatasetSpec& spec,
                                      const RobotModel& model, const std::string& robot_id) {
  std::vector<fs::path> dirs;
  const RigidTransform recorded_base;
  const RigidTransform true_base = RigidTransform::FromTranslation(spec.workspace_offset);
  for (int clip = 0; clip < spec.clips; ++clip) {
    char name[32];
    std::snprintf(name, sizeof name, "clip_%03d", clip);
    const fs::path dir = root / name;
    Rng rng(spec.seed * 1000003ULL + std::uint64_t(clip));

    ContainerMeta meta;
    meta.robot = robot_id;
    meta.camera = WorkspaceCamera(spec.width, spec.height);
    meta.source_base = recorded_base;
    meta.frame_rate = 10.0;
    meta.frame_count = std::size_t(spec.frames);
    CameraModel true_camera = meta.camera;
    true_camera.cx += spec.calibration_error_px;
    true_camera.cy -= spec.calibration_error_px / 2;

    const JointConfig center = WorkPose(model, rng);
    const auto path = SmoothJointPath(model, center, spec.frames, spec.amplitude, rng);
    const auto gripper = SmoothGripperFractions(spec.frames, rng);
    const Trajectory traj = TrajectoryFromJointPath(name, model, true_base, path, gripper);
    WriteContainerMetadata(dir, meta, traj);

    const RgbImage scene = SceneImage(spec.width, spec.height, rng);
    std::vector<RgbImage> frames;
    std::vector<BinaryMask> learned;
    for (int t = 0; t < spec.frames; ++t) {
      const std::vector<double> fingers =
          model.gripper ? MapGripper(gripper[std::size_t(t)], *model.gripper) : std::vector<double>{};
      const RenderOutput render = RasterizeRobot(model, path[std::size_t(t)], true_base, true_camera, fingers);
      frames.push_back(CompositeFrame(scene, render).image);
      if (spec.learned_masks) {
        const auto tip = ProjectPoint(true_camera, traj.ee_poses[std::size_t(t)].translation());
        learned.push_back(CorruptLearnedMask(render.mask, tip ? tip->u : -1e9, tip ? tip->v : -1e9,
                                             spec.corruption, rng));
      }
    }
    WriteFrameSequence(dir / "frames", frames);
    if (spec.learned_masks) WriteMaskSequence(dir / "masks_learned", learned);
    dirs.push_back(dir);
  }
  return dirs;
}

}  // namespace crosspaint::synth
