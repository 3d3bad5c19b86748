#pragma once

#include <limits>
#include <vector>

#include "crosspaint/image.hpp"

namespace crosspaint {

struct FusionParams {
  int search_radius_px = 20;
  int search_step_px = 2;
  bool refine = true;  // +-1 px around the coarse optimum
  double prune_tau_px = 12.0;
  int close_kernel_px = 5;
  double flag_iou_threshold = 0.5;

  // Throws ConfigError.
  void Validate() const;
};

struct Shift {
  int dx = 0;
  int dy = 0;
  bool operator==(const Shift&) const = default;
};

struct FusionResult {
  BinaryMask fused;
  Shift shift;  // applied to the simulation mask
  double aligned_iou = 0.0;
  bool flagged = false;
};

// |a & b| / |a | b|, and 1 when both are empty.
double Iou(const BinaryMask& a, const BinaryMask& b);

// out(x, y) = m(x - dx, y - dy); pixels shifted in from outside are unset.
BinaryMask ShiftMask(const BinaryMask& m, Shift s);

struct AlignmentResult {
  Shift shift;
  double iou = 0.0;
};

// Exhaustive search over shifts that are multiples of the step within the
// radius, then (optionally) the 3x3 neighbourhood of the winner, clipped to
// the radius. Ties go to the smaller dx^2 + dy^2, then smaller (dx, dy).
AlignmentResult AlignTranslation(const BinaryMask& sim, const BinaryMask& learned,
                                 const FusionParams& params);

struct DistanceField {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int x, int y) const { return values[std::size_t(y) * std::size_t(width) + std::size_t(x)]; }
};

// Exact Euclidean distance to the nearest set pixel, +inf for an empty mask.
DistanceField DistanceTransform(const BinaryMask& mask);

// Keeps learned pixels within tau of aligned_sim.
BinaryMask DistancePrune(const BinaryMask& learned, const BinaryMask& aligned_sim, double tau);

// Dilation then erosion by a kernel_px square. Dilation sees the outside as
// unset and erosion ignores the outside, so the result always contains the
// input. Throws BadKernel unless kernel_px is odd and >= 1.
BinaryMask MorphologicalClose(const BinaryMask& mask, int kernel_px);

// Dilation by a (2 * radius_px + 1) square; the outside counts as unset.
BinaryMask Dilate(const BinaryMask& mask, int radius_px);

FusionResult Fuse(const BinaryMask& sim, const BinaryMask& learned, const FusionParams& params);

}  // namespace crosspaint
