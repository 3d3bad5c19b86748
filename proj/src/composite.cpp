#include "crosspaint/composite.hpp"

namespace crosspaint {

AugmentedFrame CompositeFrame(const RgbImage& background, const RenderOutput& render,
                              const CompositeParams& params) {
  RequireSameSize(background, render.rgb, "composite render");
  RequireSameSize(background, render.mask, "composite mask");
  AugmentedFrame out{background, render.mask};
  const BinaryMask& m = render.mask;
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      if (!m.get(x, y)) continue;
      const std::uint8_t* src = render.rgb.at(x, y);
      std::uint8_t* dst = out.image.at(x, y);
      bool edge = false;
      if (params.feather_edges) {
        for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
          edge = edge || (m.in_bounds(x + dx, y + dy) && !m.get(x + dx, y + dy));
        }
      }
      for (int c = 0; c < 3; ++c) {
        dst[c] = edge ? std::uint8_t((int(src[c]) + int(dst[c]) + 1) / 2) : src[c];
      }
    }
  }
  return out;
}

std::vector<AugmentedFrame> CompositeTrajectory(const std::vector<RgbImage>& backgrounds,
                                                const std::vector<RenderOutput>& renders,
                                                const CompositeParams& params) {
  if (backgrounds.size() != renders.size()) {
    throw LengthMismatch("composite: " + std::to_string(backgrounds.size()) + " backgrounds vs " +
                         std::to_string(renders.size()) + " renders");
  }
  std::vector<AugmentedFrame> out;
  out.reserve(backgrounds.size());
  for (std::size_t i = 0; i < backgrounds.size(); ++i) {
    out.push_back(CompositeFrame(backgrounds[i], renders[i], params));
  }
  return out;
}

}  // namespace crosspaint
