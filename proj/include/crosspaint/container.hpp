#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "crosspaint/geometry.hpp"
#include "crosspaint/image.hpp"
#include "crosspaint/render.hpp"
#include "crosspaint/replay.hpp"

namespace crosspaint {

inline constexpr int kSchemaVersion = 1;

// meta.json of a trajectory container.
struct ContainerMeta {
  int schema_version = kSchemaVersion;
  std::string robot;           // source robot id
  CameraModel camera;
  RigidTransform source_base;  // source robot base in the world frame
  double frame_rate = 10.0;
  std::size_t frame_count = 0;
};

// One on-disk trajectory:
//   meta.json, poses.json, frames/NNNNNN.png, optional masks_learned/NNNNNN.png
// Pipeline outputs land next to them: masks_sim/, masks_fused/, background/,
// aug/<robot>/frames/NNNNNN.png and aug/<robot>/replay.json.
struct Container {
  std::filesystem::path dir;
  ContainerMeta meta;
  Trajectory trajectory;  // id is the directory name
  bool has_learned_masks = false;

  std::filesystem::path frame_path(std::size_t i) const;
  std::filesystem::path learned_mask_path(std::size_t i) const;
};

// Parses and cross-checks a container. Throws InvalidContainer describing
// the first problem found.
Container ReadContainer(const std::filesystem::path& dir);

// Every problem found (empty when valid).
std::vector<std::string> ValidateContainer(const std::filesystem::path& dir);

// Writes meta.json and poses.json; frames and masks are written separately.
// `actions` holds serialized JSON values (an empty string writes null).
void WriteContainerMetadata(const std::filesystem::path& dir, const ContainerMeta& meta,
                            const Trajectory& traj);

std::vector<RgbImage> ReadFrames(const Container& c);
std::vector<BinaryMask> ReadMaskSequence(const std::filesystem::path& dir, std::size_t count);
void WriteMaskSequence(const std::filesystem::path& dir, const std::vector<BinaryMask>& masks);
void WriteFrameSequence(const std::filesystem::path& dir, const std::vector<RgbImage>& frames);

// Containers under `root`: root itself when it holds meta.json, otherwise
// its immediate subdirectories that do, sorted by name.
std::vector<std::filesystem::path> DiscoverContainers(const std::filesystem::path& root);

}  // namespace crosspaint
