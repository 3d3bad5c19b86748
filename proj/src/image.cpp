#include "crosspaint/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>

namespace crosspaint {

std::size_t BinaryMask::count() const {
  std::size_t n = 0;
  for (auto b : bits) n += b;
  return n;
}

DepthImage::DepthImage(int w, int h)
    : width(w),
      height(h),
      depth(std::size_t(w) * std::size_t(h), std::numeric_limits<float>::infinity()) {}

bool IsSubset(const BinaryMask& a, const BinaryMask& b) {
  RequireSameSize(a, b, "IsSubset");
  for (std::size_t i = 0; i < a.bits.size(); ++i) {
    if (a.bits[i] && !b.bits[i]) return false;
  }
  return true;
}

BinaryMask Union(const BinaryMask& a, const BinaryMask& b) {
  RequireSameSize(a, b, "Union");
  BinaryMask out(a.width, a.height);
  for (std::size_t i = 0; i < a.bits.size(); ++i) out.bits[i] = a.bits[i] | b.bits[i];
  return out;
}

BinaryMask Intersection(const BinaryMask& a, const BinaryMask& b) {
  RequireSameSize(a, b, "Intersection");
  BinaryMask out(a.width, a.height);
  for (std::size_t i = 0; i < a.bits.size(); ++i) out.bits[i] = a.bits[i] & b.bits[i];
  return out;
}

// ---------------------------------------------------------------------------
// PNG

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void PngError(png_structp png, png_const_charp msg) {
  auto* what = static_cast<std::string*>(png_get_error_ptr(png));
  *what = msg;
  png_longjmp(png, 1);
}

void PngWarning(png_structp, png_const_charp) {}

void WriteRows(const std::filesystem::path& path, int width, int height,
               int bit_depth, int color_type,
               const std::vector<std::vector<std::uint8_t>>& rows) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw ImageIoError("cannot open " + path.string() + " for writing");
  std::string err;
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, PngError, PngWarning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw ImageIoError("libpng init failed");
  }
  std::vector<png_bytep> ptrs(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ptrs[i] = const_cast<png_bytep>(rows[i].data());
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw ImageIoError("writing " + path.string() + ": " + err);
  }
  png_init_io(png, f.get());
  png_set_compression_level(png, 1);
  png_set_IHDR(png, info, png_uint_32(width), png_uint_32(height), bit_depth,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, ptrs.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

struct Decoded {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // always expanded to RGB8
};

Decoded ReadRgb8(const std::filesystem::path& path, bool header_only) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw ImageIoError("cannot open " + path.string());
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw ImageIoError(path.string() + " is not a PNG file");
  }
  std::string err;
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, PngError, PngWarning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ImageIoError("libpng init failed");
  }
  Decoded out;
  std::vector<png_bytep> ptrs;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ImageIoError("reading " + path.string() + ": " + err);
  }
  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  out.width = int(png_get_image_width(png, info));
  out.height = int(png_get_image_height(png, info));
  if (header_only) {
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
  }
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (depth == 16) png_set_strip_16(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  png_read_update_info(png, info);
  out.rgb.resize(std::size_t(out.width) * std::size_t(out.height) * 3);
  ptrs.resize(std::size_t(out.height));
  for (int y = 0; y < out.height; ++y) {
    ptrs[std::size_t(y)] = out.rgb.data() + std::size_t(y) * std::size_t(out.width) * 3;
  }
  png_read_image(png, ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

}  // namespace

void WritePng(const RgbImage& image, const std::filesystem::path& path) {
  std::vector<std::vector<std::uint8_t>> rows(std::size_t(image.height));
  const std::size_t stride = std::size_t(image.width) * 3;
  for (int y = 0; y < image.height; ++y) {
    const auto* begin = image.data.data() + std::size_t(y) * stride;
    rows[std::size_t(y)].assign(begin, begin + stride);
  }
  WriteRows(path, image.width, image.height, 8, PNG_COLOR_TYPE_RGB, rows);
}

void WritePng(const BinaryMask& mask, const std::filesystem::path& path) {
  std::vector<std::vector<std::uint8_t>> rows(std::size_t(mask.height));
  const std::size_t stride = (std::size_t(mask.width) + 7) / 8;
  for (int y = 0; y < mask.height; ++y) {
    auto& row = rows[std::size_t(y)];
    row.assign(stride, 0);
    for (int x = 0; x < mask.width; ++x) {
      if (mask.get(x, y)) row[std::size_t(x) / 8] |= std::uint8_t(0x80u >> (x % 8));
    }
  }
  WriteRows(path, mask.width, mask.height, 1, PNG_COLOR_TYPE_GRAY, rows);
}

RgbImage ReadRgbPng(const std::filesystem::path& path) {
  Decoded d = ReadRgb8(path, false);
  RgbImage img;
  img.width = d.width;
  img.height = d.height;
  img.data = std::move(d.rgb);
  return img;
}

BinaryMask ReadMaskPng(const std::filesystem::path& path) {
  const Decoded d = ReadRgb8(path, false);
  BinaryMask m(d.width, d.height);
  for (std::size_t i = 0; i < m.bits.size(); ++i) {
    m.bits[i] = (d.rgb[3 * i] | d.rgb[3 * i + 1] | d.rgb[3 * i + 2]) ? 1 : 0;
  }
  return m;
}

std::pair<int, int> PngSize(const std::filesystem::path& path) {
  const Decoded d = ReadRgb8(path, true);
  return {d.width, d.height};
}

std::string FrameFileName(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu.png", index);
  return buf;
}

double Psnr(const RgbImage& a, const RgbImage& b, const BinaryMask* region) {
  RequireSameSize(a, b, "Psnr");
  if (region) RequireSameSize(a, *region, "Psnr region");
  double sse = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.pixel_count(); ++i) {
    if (region && !region->bits[i]) continue;
    for (int c = 0; c < 3; ++c) {
      const double d = double(a.data[3 * i + std::size_t(c)]) - b.data[3 * i + std::size_t(c)];
      sse += d * d;
    }
    n += 3;
  }
  if (n == 0 || sse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / (sse / double(n)));
}

}  // namespace crosspaint
