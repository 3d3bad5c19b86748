#include "crosspaint/inpaint.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>

#include "crosspaint/maskfusion.hpp"

namespace crosspaint {

void InpaintParams::Validate() const {
  if (mask_dilation_px < 0) throw ConfigError("inpaint mask dilation must be >= 0");
  if (fill_iterations < 0) throw ConfigError("inpaint fill iterations must be >= 0");
  if (!(fill_tolerance > 0)) throw ConfigError("inpaint fill tolerance must be positive");
}

BackgroundEstimate TemporalMedianBackground(const std::vector<RgbImage>& frames,
                                            const std::vector<BinaryMask>& masks) {
  if (frames.empty()) throw EmptySequence("background needs at least one frame");
  if (masks.size() != frames.size()) {
    throw DimensionMismatch("background: " + std::to_string(frames.size()) + " frames vs " +
                            std::to_string(masks.size()) + " masks");
  }
  for (std::size_t t = 0; t < frames.size(); ++t) {
    RequireSameSize(frames[0], frames[t], "background frames");
    RequireSameSize(frames[0], masks[t], "background masks");
  }
  const int w = frames[0].width, h = frames[0].height;
  BackgroundEstimate est{RgbImage(w, h), BinaryMask(w, h)};
  std::array<std::vector<std::uint8_t>, 3> samples;
  for (std::size_t i = 0; i < est.image.pixel_count(); ++i) {
    for (auto& s : samples) s.clear();
    for (std::size_t t = 0; t < frames.size(); ++t) {
      if (masks[t].bits[i]) continue;
      for (int c = 0; c < 3; ++c) samples[c].push_back(frames[t].data[3 * i + std::size_t(c)]);
    }
    if (samples[0].empty()) continue;
    est.coverage.bits[i] = 1;
    for (int c = 0; c < 3; ++c) {
      auto& s = samples[c];
      const auto mid = s.begin() + std::ptrdiff_t((s.size() - 1) / 2);
      std::nth_element(s.begin(), mid, s.end());
      est.image.data[3 * i + std::size_t(c)] = *mid;
    }
  }
  return est;
}

RgbImage DiffusionFill(const RgbImage& image, const BinaryMask& hole, int iterations,
                       double tolerance) {
  RequireSameSize(image, hole, "DiffusionFill");
  const int w = image.width, h = image.height;
  const std::size_t n = image.pixel_count();
  if (hole.count() == 0) return image;

  // Label 4-connected hole components; note which touch a fixed pixel and
  // the mean of their fixed neighbours.
  std::vector<int> label(n, -1);
  std::vector<std::array<double, 3>> boundary_sum;
  std::vector<int> boundary_count;
  std::vector<std::size_t> stack;
  const int dxs[4] = {1, -1, 0, 0}, dys[4] = {0, 0, 1, -1};
  for (std::size_t start = 0; start < n; ++start) {
    if (!hole.bits[start] || label[start] >= 0) continue;
    const int id = int(boundary_count.size());
    boundary_sum.push_back({0, 0, 0});
    boundary_count.push_back(0);
    label[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const int x = int(i % std::size_t(w)), y = int(i / std::size_t(w));
      for (int k = 0; k < 4; ++k) {
        const int nx = x + dxs[k], ny = y + dys[k];
        if (!hole.in_bounds(nx, ny)) continue;
        const std::size_t j = hole.index(nx, ny);
        if (hole.bits[j]) {
          if (label[j] < 0) {
            label[j] = id;
            stack.push_back(j);
          }
        } else {
          for (int c = 0; c < 3; ++c) boundary_sum[id][c] += image.data[3 * j + std::size_t(c)];
          ++boundary_count[id];
        }
      }
    }
  }

  // Initial guess: mean of the row-wise and column-wise linear
  // interpolations between the nearest fixed pixels, where those exist.
  std::vector<double> cur(3 * n);
  for (std::size_t i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) cur[3 * i + std::size_t(c)] = image.data[3 * i + std::size_t(c)];
  std::vector<std::array<double, 3>> guess(n, {0, 0, 0});
  std::vector<int> guesses(n, 0);
  auto interpolate_line = [&](int len, auto index_of) {
    int i = 0;
    while (i < len) {
      if (!hole.bits[index_of(i)]) {
        ++i;
        continue;
      }
      int j = i;
      while (j < len && hole.bits[index_of(j)]) ++j;
      // Hole run [i, j). Fixed ends at i - 1 and j when inside the line.
      const bool has_lo = i > 0, has_hi = j < len;
      if (has_lo || has_hi) {
        for (int k = i; k < j; ++k) {
          const std::size_t p = index_of(k);
          for (int c = 0; c < 3; ++c) {
            double v;
            if (has_lo && has_hi) {
              const double a = image.data[3 * index_of(i - 1) + std::size_t(c)];
              const double b = image.data[3 * index_of(j) + std::size_t(c)];
              v = a + (b - a) * double(k - i + 1) / double(j - i + 1);
            } else {
              v = image.data[3 * index_of(has_lo ? i - 1 : j) + std::size_t(c)];
            }
            guess[p][c] += v;
          }
          ++guesses[p];
        }
      }
      i = j;
    }
  };
  for (int y = 0; y < h; ++y) interpolate_line(w, [&](int x) { return hole.index(x, y); });
  for (int x = 0; x < w; ++x) interpolate_line(h, [&](int y) { return hole.index(x, y); });

  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < n; ++i) {
    if (!hole.bits[i]) continue;
    const int id = label[i];
    for (int c = 0; c < 3; ++c) {
      double& v = cur[3 * i + std::size_t(c)];
      if (boundary_count[id] == 0) {
        v = 128.0;
      } else if (guesses[i] > 0) {
        v = guess[i][c] / guesses[i];
      } else {
        v = boundary_sum[id][c] / boundary_count[id];
      }
    }
    if (boundary_count[id] > 0) active.push_back(i);
  }

  std::vector<double> next = cur;
  for (int it = 0; it < iterations && !active.empty(); ++it) {
    double max_change = 0.0;
    for (std::size_t i : active) {
      const int x = int(i % std::size_t(w)), y = int(i / std::size_t(w));
      std::array<double, 3> sum{0, 0, 0};
      int count = 0;
      for (int k = 0; k < 4; ++k) {
        const int nx = x + dxs[k], ny = y + dys[k];
        if (!hole.in_bounds(nx, ny)) continue;
        const std::size_t j = hole.index(nx, ny);
        for (int c = 0; c < 3; ++c) sum[c] += cur[3 * j + std::size_t(c)];
        ++count;
      }
      for (int c = 0; c < 3; ++c) {
        const double v = sum[c] / count;
        max_change = std::max(max_change, std::abs(v - cur[3 * i + std::size_t(c)]));
        next[3 * i + std::size_t(c)] = v;
      }
    }
    for (std::size_t i : active)
      for (int c = 0; c < 3; ++c) cur[3 * i + std::size_t(c)] = next[3 * i + std::size_t(c)];
    if (max_change < tolerance) break;
  }

  RgbImage out = image;
  for (std::size_t i = 0; i < n; ++i) {
    if (!hole.bits[i]) continue;
    for (int c = 0; c < 3; ++c) {
      out.data[3 * i + std::size_t(c)] =
          std::uint8_t(std::clamp(std::lround(cur[3 * i + std::size_t(c)]), 0L, 255L));
    }
  }
  return out;
}

std::vector<RgbImage> ReconstructBackground(const std::vector<RgbImage>& frames,
                                            const std::vector<BinaryMask>& masks,
                                            const InpaintParams& params) {
  params.Validate();
  if (masks.size() != frames.size()) {
    throw DimensionMismatch("background: " + std::to_string(frames.size()) + " frames vs " +
                            std::to_string(masks.size()) + " masks");
  }
  std::vector<BinaryMask> dilated;
  dilated.reserve(masks.size());
  for (const auto& m : masks) dilated.push_back(Dilate(m, params.mask_dilation_px));
  BackgroundEstimate est = TemporalMedianBackground(frames, dilated);
  BinaryMask hole = est.coverage;
  for (auto& b : hole.bits) b ^= 1;
  const RgbImage filled =
      DiffusionFill(est.image, hole, params.fill_iterations, params.fill_tolerance);
  return std::vector<RgbImage>(frames.size(), filled);
}

namespace {

std::string ShellQuote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

}  // namespace

std::vector<RgbImage> ExternalInpaint(const std::filesystem::path& trajectory_dir,
                                      const std::string& tool_command, std::size_t frame_count,
                                      int width, int height) {
  namespace fs = std::filesystem;
  const fs::path out_dir = trajectory_dir / "background";
  std::error_code ec;
  fs::remove_all(out_dir, ec);

  const std::string cmd = tool_command + " " + ShellQuote(trajectory_dir.string());
  const int status = std::system(cmd.c_str());
  if (status == -1) throw ToolLaunchFailure("could not start shell for: " + cmd);
  if (!WIFEXITED(status)) throw ProtocolViolation("inpaint tool terminated abnormally: " + cmd);
  const int code = WEXITSTATUS(status);
  if (code == 126 || code == 127) {
    throw ToolLaunchFailure("inpaint tool could not be executed (exit " + std::to_string(code) +
                            "): " + tool_command);
  }
  if (code != 0) throw ProtocolViolation("inpaint tool exited with " + std::to_string(code));

  if (!fs::is_directory(out_dir)) throw ProtocolViolation("inpaint tool wrote no background/ directory");
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(out_dir)) {
    if (e.path().extension() == ".png") ++files;
  }
  if (files != frame_count) {
    throw ProtocolViolation("inpaint tool wrote " + std::to_string(files) + " images for " +
                            std::to_string(frame_count) + " frames");
  }
  std::vector<RgbImage> out;
  out.reserve(frame_count);
  for (std::size_t i = 0; i < frame_count; ++i) {
    const fs::path p = out_dir / FrameFileName(i);
    if (!fs::exists(p)) throw ProtocolViolation("inpaint tool output missing " + p.string());
    try {
      out.push_back(ReadRgbPng(p));
    } catch (const ImageIoError& e) {
      throw ProtocolViolation(std::string("unreadable inpaint output: ") + e.what());
    }
    if (out.back().width != width || out.back().height != height) {
      throw ProtocolViolation(p.string() + " has the wrong dimensions");
    }
  }
  return out;
}

InpaintOutcome InpaintTrajectory(const std::filesystem::path& trajectory_dir,
                                 const std::vector<RgbImage>& frames,
                                 const std::vector<BinaryMask>& masks, const InpaintParams& params) {
  params.Validate();
  if (frames.empty()) throw EmptySequence("background needs at least one frame");
  InpaintOutcome outcome;
  if (!params.tool_command.empty()) {
    try {
      outcome.backgrounds = ExternalInpaint(trajectory_dir, params.tool_command, frames.size(),
                                            frames[0].width, frames[0].height);
      return outcome;
    } catch (const ToolLaunchFailure& e) {
      outcome.warning = std::string("external inpainting unavailable, used baseline: ") + e.what();
    } catch (const ProtocolViolation& e) {
      outcome.warning = std::string("external inpainting rejected, used baseline: ") + e.what();
    }
  }
  outcome.backgrounds = ReconstructBackground(frames, masks, params);
  return outcome;
}

}  // namespace crosspaint
