#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "crosspaint/errors.hpp"

namespace crosspaint {

// Row-major interleaved 8-bit RGB.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), data(std::size_t(w) * std::size_t(h) * 3, fill) {}

  std::size_t index(int x, int y) const {
    return (std::size_t(y) * std::size_t(width) + std::size_t(x)) * 3;
  }
  std::uint8_t* at(int x, int y) { return data.data() + index(x, y); }
  const std::uint8_t* at(int x, int y) const { return data.data() + index(x, y); }
  std::size_t pixel_count() const { return std::size_t(width) * std::size_t(height); }

  bool operator==(const RgbImage&) const = default;
};

// Row-major binary grid; every byte is 0 or 1.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(int w, int h, bool fill = false)
      : width(w), height(h), bits(std::size_t(w) * std::size_t(h), fill ? 1 : 0) {}

  std::size_t index(int x, int y) const {
    return std::size_t(y) * std::size_t(width) + std::size_t(x);
  }
  bool get(int x, int y) const { return bits[index(x, y)] != 0; }
  void set(int x, int y, bool v = true) { bits[index(x, y)] = v ? 1 : 0; }
  bool in_bounds(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height;
  }
  std::size_t count() const;
  bool empty() const { return count() == 0; }
  std::size_t pixel_count() const { return bits.size(); }

  bool operator==(const BinaryMask&) const = default;
};

// Per-pixel camera-space depth in meters, +inf where nothing was drawn.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<float> depth;

  DepthImage() = default;
  DepthImage(int w, int h);

  float at(int x, int y) const { return depth[std::size_t(y) * std::size_t(width) + std::size_t(x)]; }
  bool operator==(const DepthImage&) const = default;
};

// Throws DimensionMismatch naming `what` unless both operands agree.
template <typename A, typename B>
void RequireSameSize(const A& a, const B& b, const char* what) {
  if (a.width != b.width || a.height != b.height) {
    throw DimensionMismatch(std::string(what) + ": " + std::to_string(a.width) +
                            "x" + std::to_string(a.height) + " vs " +
                            std::to_string(b.width) + "x" +
                            std::to_string(b.height));
  }
}

// A is a subset of B (pixelwise implication).
bool IsSubset(const BinaryMask& a, const BinaryMask& b);
BinaryMask Union(const BinaryMask& a, const BinaryMask& b);
BinaryMask Intersection(const BinaryMask& a, const BinaryMask& b);

// PNG is the one raster container used for every frame and mask on disk:
// RGB frames as 8-bit truecolor, masks as 1-bit grayscale. Output bytes are
// a pure function of pixel content (no timestamps or text chunks).
void WritePng(const RgbImage& image, const std::filesystem::path& path);
void WritePng(const BinaryMask& mask, const std::filesystem::path& path);
RgbImage ReadRgbPng(const std::filesystem::path& path);
// Any non-zero gray (or any non-black color) reads as set.
BinaryMask ReadMaskPng(const std::filesystem::path& path);
// Per-frame raster name inside a sequence directory: 000000.png, 000001.png...
std::string FrameFileName(std::size_t index);

// Width and height from the header only.
std::pair<int, int> PngSize(const std::filesystem::path& path);

// Peak signal-to-noise ratio over the pixels set in `region` (all pixels
// when region is null). +inf for identical inputs.
double Psnr(const RgbImage& a, const RgbImage& b, const BinaryMask* region = nullptr);

}  // namespace crosspaint
