#include <algorithm>
#include <cmath>
#include <fstream>

#include "doctest.h"

#include "crosspaint/errors.hpp"
#include "crosspaint/inpaint.hpp"
#include "test_util.hpp"

using namespace crosspaint;
using namespace crosspaint::testing;
namespace fs = std::filesystem;

namespace {

RgbImage RandomImage(int w, int h, Rng& rng) {
  RgbImage img(w, h);
  for (auto& b : img.data) b = std::uint8_t(rng.UniformInt(0, 255));
  return img;
}

BinaryMask Disc(int w, int h, double cx, double cy, double r) {
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (std::hypot(x - cx, y - cy) <= r) m.set(x, y);
  return m;
}

void WriteScript(const fs::path& path, const std::string& body) {
  std::ofstream(path) << "#!/bin/sh\n" << body << "\n";
  fs::permissions(path, fs::perms::owner_all);
}

// A trajectory directory holding frames/ for the hook tests.
std::vector<RgbImage> WriteFrames(const fs::path& dir, int count, Rng& rng) {
  fs::create_directories(dir / "frames");
  std::vector<RgbImage> frames;
  for (int i = 0; i < count; ++i) {
    frames.push_back(RandomImage(12, 8, rng));
    WritePng(frames.back(), dir / "frames" / FrameFileName(std::size_t(i)));
  }
  return frames;
}

}  // namespace

TEST_CASE("temporal median: static scene, no masks") {
  Rng rng(1);
  const RgbImage scene = RandomImage(16, 12, rng);
  const std::vector<RgbImage> frames(5, scene);
  const std::vector<BinaryMask> masks(5, BinaryMask(16, 12));
  const auto est = TemporalMedianBackground(frames, masks);
  CHECK(est.image == scene);
  CHECK(est.coverage.count() == est.coverage.pixel_count());
}

TEST_CASE("temporal median: moving occluder leaves the true scene") {
  Rng rng(2);
  const int w = 40, h = 30;
  const RgbImage scene = RandomImage(w, h, rng);
  std::vector<RgbImage> frames;
  std::vector<BinaryMask> masks;
  for (int t = 0; t < 6; ++t) {
    const BinaryMask m = Disc(w, h, 5 + 6 * t, 15, 6);
    RgbImage f = scene;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (m.get(x, y)) std::fill_n(f.at(x, y), 3, std::uint8_t(255 - 20 * t));
    frames.push_back(f);
    masks.push_back(m);
  }
  const auto est = TemporalMedianBackground(frames, masks);
  CHECK(est.coverage.count() == est.coverage.pixel_count());
  CHECK(est.image == scene);
}

TEST_CASE("temporal median: lower median, coverage and errors") {
  std::vector<RgbImage> frames;
  for (std::uint8_t v : {10, 40, 20, 30}) frames.push_back(RgbImage(2, 1, v));
  std::vector<BinaryMask> masks(4, BinaryMask(2, 1));
  for (auto& m : masks) m.set(1, 0);
  const auto est = TemporalMedianBackground(frames, masks);
  CHECK(est.image.at(0, 0)[0] == 20);  // sorted 10 20 30 40
  CHECK(est.coverage.get(0, 0));
  CHECK_FALSE(est.coverage.get(1, 0));
  CHECK(est.image.at(1, 0)[0] == 0);

  CHECK_THROWS_AS(TemporalMedianBackground({}, {}), EmptySequence);
  CHECK_THROWS_AS(TemporalMedianBackground(frames, {masks[0]}), DimensionMismatch);
  masks[2] = BinaryMask(3, 1);
  CHECK_THROWS_AS(TemporalMedianBackground(frames, masks), DimensionMismatch);
}

TEST_CASE("diffusion fill: examples") {
  RgbImage img(20, 20, 0);
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    img.data[3 * i] = 90;
    img.data[3 * i + 1] = 17;
    img.data[3 * i + 2] = 200;
  }
  const BinaryMask hole = Disc(20, 20, 10, 10, 5);
  RgbImage holed = img;
  for (std::size_t i = 0; i < hole.bits.size(); ++i)
    if (hole.bits[i]) std::fill_n(holed.data.begin() + std::ptrdiff_t(3 * i), 3, std::uint8_t(0));
  CHECK(DiffusionFill(holed, hole, 2000, 0.5) == img);
  CHECK(DiffusionFill(holed, BinaryMask(20, 20), 2000, 0.5) == holed);

  // 0 | three unknowns | 255 on a single row: the harmonic solution is the
  // ramp 63.75, 127.5, 191.25.
  RgbImage row(5, 1);
  std::fill_n(row.at(4, 0), 3, std::uint8_t(255));
  BinaryMask rh(5, 1);
  for (int x = 1; x <= 3; ++x) rh.set(x, 0);
  const RgbImage ramp = DiffusionFill(row, rh, 2000, 0.5);
  for (int x = 1; x <= 3; ++x) CHECK(std::abs(ramp.at(x, 0)[1] - 63.75 * x) <= 0.5 + 0.5);

  // Nothing observed at all.
  const RgbImage gray = DiffusionFill(RgbImage(4, 3, 9), BinaryMask(4, 3, true), 2000, 0.5);
  CHECK(gray == RgbImage(4, 3, 128));
}

TEST_CASE("diffusion fill: linear boundary data gives the linear field") {
  // A linear function is discretely harmonic, so it is the exact solution.
  const int w = 48, h = 40;
  RgbImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      img.at(x, y)[0] = std::uint8_t(2 * x + 3 * y);
      img.at(x, y)[1] = std::uint8_t(200 - 4 * y);
      img.at(x, y)[2] = std::uint8_t(5 * x);
    }
  BinaryMask hole = Disc(w, h, 20, 18, 9);
  for (int x = 30; x < 40; ++x) hole.set(x, 10);
  RgbImage holed = img;
  for (std::size_t i = 0; i < hole.bits.size(); ++i)
    if (hole.bits[i]) std::fill_n(holed.data.begin() + std::ptrdiff_t(3 * i), 3, std::uint8_t(77));
  const RgbImage out = DiffusionFill(holed, hole, 2000, 0.01);
  for (std::size_t i = 0; i < out.data.size(); ++i) CHECK(std::abs(int(out.data[i]) - int(img.data[i])) <= 1);
}

TEST_CASE("property: fill locality, maximum principle, determinism") {
  Rng rng(3);
  for (int trial = 0; trial < 8; ++trial) {
    const int w = rng.UniformInt(10, 40), h = rng.UniformInt(10, 40);
    const RgbImage img = RandomImage(w, h, rng);
    BinaryMask hole(w, h);
    for (int k = 0; k < 3; ++k) {
      const BinaryMask d = Disc(w, h, rng.Uniform(0, w), rng.Uniform(0, h), rng.Uniform(2, 8));
      hole = Union(hole, d);
    }
    const RgbImage out = DiffusionFill(img, hole, 300, 0.5);
    CHECK(out == DiffusionFill(img, hole, 300, 0.5));
    // Global boundary range per channel bounds every component's range.
    std::array<int, 3> lo{255, 255, 255}, hi{0, 0, 0};
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (hole.get(x, y)) continue;
        bool boundary = false;
        for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}})
          boundary = boundary || (hole.in_bounds(x + dx, y + dy) && hole.get(x + dx, y + dy));
        if (!boundary) continue;
        for (int c = 0; c < 3; ++c) {
          lo[c] = std::min<int>(lo[c], img.at(x, y)[c]);
          hi[c] = std::max<int>(hi[c], img.at(x, y)[c]);
        }
      }
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (!hole.get(x, y)) {
          CHECK(std::equal(out.at(x, y), out.at(x, y) + 3, img.at(x, y)));
        } else if (hole.count() < hole.pixel_count()) {
          for (int c = 0; c < 3; ++c) {
            CHECK(out.at(x, y)[c] >= lo[c]);
            CHECK(out.at(x, y)[c] <= hi[c]);
          }
        }
      }
  }
}

TEST_CASE("reconstruct background: dilation hides robot-edge bleed") {
  Rng rng(4);
  const int w = 60, h = 30;
  const RgbImage scene = RandomImage(w, h, rng);
  std::vector<RgbImage> frames;
  std::vector<BinaryMask> masks;
  // Parked for four frames, then gone to the other side.
  for (int t = 0; t < 5; ++t) {
    const double cx = t < 4 ? 15 : 45;
    const BinaryMask robot = Disc(w, h, cx, 15, 5);
    // The frame shows a halo wider than the mask.
    const BinaryMask halo = Disc(w, h, cx, 15, 6.5);
    RgbImage f = scene;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (halo.get(x, y)) std::fill_n(f.at(x, y), 3, std::uint8_t(250));
    frames.push_back(f);
    masks.push_back(robot);
  }
  InpaintParams p;
  const auto bgs = ReconstructBackground(frames, masks, p);
  REQUIRE(bgs.size() == 5);
  for (const auto& b : bgs) CHECK(b == bgs[0]);
  CHECK(bgs[0] == scene);
  p.mask_dilation_px = 0;
  CHECK_FALSE(ReconstructBackground(frames, masks, p)[0] == scene);
  p.fill_tolerance = 0;
  CHECK_THROWS_AS(ReconstructBackground(frames, masks, p), ConfigError);
}

TEST_CASE("external hook: identity tool") {
  TempDir dir("hook_ok");
  Rng rng(5);
  const auto frames = WriteFrames(dir.path() / "traj", 3, rng);
  WriteScript(dir.path() / "tool.sh", "cp -r \"$1/frames\" \"$1/background\"");
  const auto bgs = ExternalInpaint(dir.path() / "traj", (dir.path() / "tool.sh").string(), 3, 12, 8);
  CHECK(bgs == frames);

  InpaintParams p;
  p.tool_command = (dir.path() / "tool.sh").string();
  const auto outcome =
      InpaintTrajectory(dir.path() / "traj", frames, std::vector<BinaryMask>(3, BinaryMask(12, 8)), p);
  CHECK(outcome.backgrounds == frames);
  CHECK_FALSE(outcome.warning);
}

TEST_CASE("external hook: protocol violations fall back to the baseline") {
  TempDir dir("hook_bad");
  Rng rng(6);
  const fs::path traj = dir.path() / "traj";
  const auto frames = WriteFrames(traj, 3, rng);
  const std::vector<BinaryMask> masks(3, BinaryMask(12, 8));
  InpaintParams p;
  const auto baseline = ReconstructBackground(frames, masks, p);

  WriteScript(dir.path() / "short.sh",
              "mkdir -p \"$1/background\"; cp \"$1/frames/000000.png\" \"$1/background/\"");
  WriteScript(dir.path() / "fails.sh", "exit 3");
  CHECK_THROWS_AS(ExternalInpaint(traj, (dir.path() / "short.sh").string(), 3, 12, 8), ProtocolViolation);
  CHECK_THROWS_AS(ExternalInpaint(traj, (dir.path() / "fails.sh").string(), 3, 12, 8), ProtocolViolation);
  // Right count, wrong size.
  WriteScript(dir.path() / "copy.sh", "cp -r \"$1/frames\" \"$1/background\"");
  CHECK_THROWS_AS(ExternalInpaint(traj, (dir.path() / "copy.sh").string(), 3, 13, 8), ProtocolViolation);
  CHECK_THROWS_AS(ExternalInpaint(traj, (dir.path() / "absent-tool").string(), 3, 12, 8),
                  ToolLaunchFailure);

  for (const std::string tool : {"short.sh", "fails.sh", "absent-tool"}) {
    p.tool_command = (dir.path() / tool).string();
    const auto outcome = InpaintTrajectory(traj, frames, masks, p);
    CHECK(outcome.backgrounds == baseline);
    REQUIRE(outcome.warning);
    CHECK(!outcome.warning->empty());
  }
}
