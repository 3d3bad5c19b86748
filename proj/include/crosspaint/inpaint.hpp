#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "crosspaint/image.hpp"

namespace crosspaint {

struct BackgroundEstimate {
  RgbImage image;
  BinaryMask coverage;  // observed unmasked in at least one frame
};

struct InpaintParams {
  int mask_dilation_px = 3;
  int fill_iterations = 2000;
  double fill_tolerance = 0.5;  // intensity levels
  // Empty: baseline only. Otherwise run as `<tool_command> <trajectory_dir>`.
  std::string tool_command;

  // Throws ConfigError.
  void Validate() const;
};

// Per pixel and channel, the lower median over frames where the mask is
// clear. Uncovered pixels stay 0. Throws EmptySequence, DimensionMismatch.
BackgroundEstimate TemporalMedianBackground(const std::vector<RgbImage>& frames,
                                            const std::vector<BinaryMask>& masks);

// Jacobi relaxation of the discrete Laplace equation over `hole`, with every
// other pixel held fixed. Neighbours outside the image are ignored. A hole
// component touching no fixed pixel becomes mid-gray.
RgbImage DiffusionFill(const RgbImage& image, const BinaryMask& hole, int iterations,
                       double tolerance);

// Median background of the (dilated) masks plus fill, repeated for every
// frame (static camera).
std::vector<RgbImage> ReconstructBackground(const std::vector<RgbImage>& frames,
                                            const std::vector<BinaryMask>& masks,
                                            const InpaintParams& params);

// Runs the external tool on `trajectory_dir` and ingests its
// background/NNNNNN.png output. Throws ToolLaunchFailure when the command
// cannot be started and ProtocolViolation on a failing exit code or on
// missing, extra or wrongly sized output.
std::vector<RgbImage> ExternalInpaint(const std::filesystem::path& trajectory_dir,
                                      const std::string& tool_command, std::size_t frame_count,
                                      int width, int height);

struct InpaintOutcome {
  std::vector<RgbImage> backgrounds;
  std::optional<std::string> warning;  // set when the external tool was abandoned
};

// External tool when configured, falling back to ReconstructBackground on
// ToolLaunchFailure or ProtocolViolation.
InpaintOutcome InpaintTrajectory(const std::filesystem::path& trajectory_dir,
                                 const std::vector<RgbImage>& frames,
                                 const std::vector<BinaryMask>& masks, const InpaintParams& params);

}  // namespace crosspaint
