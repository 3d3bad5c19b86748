#pragma once

#include <vector>

#include "crosspaint/image.hpp"
#include "crosspaint/render.hpp"

namespace crosspaint {

struct AugmentedFrame {
  RgbImage image;
  BinaryMask robot_mask;
};

struct CompositeParams {
  // Average render and background on mask pixels that touch an unmasked
  // 4-neighbour. Off by default so each output pixel comes from exactly one
  // source.
  bool feather_edges = false;
};

// Render where the mask is set, background elsewhere. The robot always
// occludes the scene. Throws DimensionMismatch.
AugmentedFrame CompositeFrame(const RgbImage& background, const RenderOutput& render,
                              const CompositeParams& params = {});

// Frame-wise CompositeFrame. Throws LengthMismatch.
std::vector<AugmentedFrame> CompositeTrajectory(const std::vector<RgbImage>& backgrounds,
                                                const std::vector<RenderOutput>& renders,
                                                const CompositeParams& params = {});

}  // namespace crosspaint
