#include <cmath>
#include <limits>

#include "doctest.h"

#include "crosspaint/errors.hpp"
#include "crosspaint/maskfusion.hpp"
#include "test_util.hpp"

using namespace crosspaint;
using namespace crosspaint::testing;

namespace {

BinaryMask Block(int w, int h, int x0, int y0, int bw, int bh) {
  BinaryMask m(w, h);
  for (int y = y0; y < y0 + bh; ++y)
    for (int x = x0; x < x0 + bw; ++x)
      if (m.in_bounds(x, y)) m.set(x, y);
  return m;
}

// Union of random discs and rectangles, kept `margin` px from the border.
BinaryMask RandomBlob(int w, int h, int margin, Rng& rng) {
  BinaryMask m(w, h);
  const int parts = rng.UniformInt(2, 5);
  for (int k = 0; k < parts; ++k) {
    const double cx = rng.Uniform(margin + 8, w - margin - 8), cy = rng.Uniform(margin + 8, h - margin - 8);
    const double rad = rng.Uniform(3, 8);
    for (int y = margin; y < h - margin; ++y)
      for (int x = margin; x < w - margin; ++x)
        if (std::hypot(x - cx, y - cy) <= rad) m.set(x, y);
  }
  return m;
}

BinaryMask RandomNoise(int w, int h, double p, Rng& rng) {
  BinaryMask m(w, h);
  for (auto& b : m.bits) b = rng.Uniform() < p ? 1 : 0;
  return m;
}

// Oracles, deliberately naive.
BinaryMask OracleShift(const BinaryMask& m, int dx, int dy) {
  BinaryMask out(m.width, m.height);
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x)
      if (m.in_bounds(x - dx, y - dy) && m.get(x - dx, y - dy)) out.set(x, y);
  return out;
}

std::pair<long, long> OracleCounts(const BinaryMask& a, const BinaryMask& b) {
  long i = 0, u = 0;
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x) {
      i += a.get(x, y) && b.get(x, y);
      u += a.get(x, y) || b.get(x, y);
    }
  return {i, u};
}

double OracleDistance(const BinaryMask& m, int qx, int qy) {
  double best = std::numeric_limits<double>::infinity();
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x)
      if (m.get(x, y)) best = std::min(best, std::sqrt(double((x - qx) * (x - qx) + (y - qy) * (y - qy))));
  return best;
}

BinaryMask OracleClose(const BinaryMask& m, int k) {
  const int r = k / 2;
  BinaryMask dil(m.width, m.height), out(m.width, m.height);
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      bool any = false;
      for (int j = -r; j <= r; ++j)
        for (int i = -r; i <= r; ++i)
          any = any || (m.in_bounds(x + i, y + j) && m.get(x + i, y + j));
      dil.set(x, y, any);
    }
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      bool all = true;
      for (int j = -r; j <= r; ++j)
        for (int i = -r; i <= r; ++i)
          if (m.in_bounds(x + i, y + j)) all = all && dil.get(x + i, y + j);
      out.set(x, y, all);
    }
  return out;
}

}  // namespace

TEST_CASE("iou") {
  const BinaryMask a = Block(40, 30, 5, 5, 10, 10);
  CHECK(Iou(a, a) == 1.0);
  CHECK(Iou(a, Block(40, 30, 20, 5, 10, 10)) == 0.0);
  // 50 shared pixels out of 150.
  CHECK(Iou(a, Block(40, 30, 10, 5, 10, 10)) == doctest::Approx(1.0 / 3.0));
  CHECK(Iou(BinaryMask(4, 4), BinaryMask(4, 4)) == 1.0);
  CHECK_THROWS_AS(Iou(a, BinaryMask(4, 4)), DimensionMismatch);
}

TEST_CASE("shift_mask matches oracle, no wraparound") {
  Rng rng(1);
  const BinaryMask m = RandomNoise(70, 9, 0.4, rng);
  for (auto [dx, dy] : {std::pair{0, 0}, {3, -2}, {-65, 1}, {64, 0}, {-1, 8}, {80, 0}}) {
    CHECK(ShiftMask(m, {dx, dy}) == OracleShift(m, dx, dy));
  }
}

TEST_CASE("align_translation: examples") {
  Rng rng(2);
  const BinaryMask sim = RandomBlob(96, 80, 25, rng);
  FusionParams p;
  auto r = AlignTranslation(sim, sim, p);
  CHECK(r.shift == Shift{0, 0});
  CHECK(r.iou == 1.0);

  r = AlignTranslation(sim, OracleShift(sim, 6, -4), p);
  CHECK(r.shift == Shift{6, -4});
  CHECK(r.iou == 1.0);

  // Odd offsets are found by the refinement step.
  r = AlignTranslation(sim, OracleShift(sim, 7, -3), p);
  CHECK(r.shift == Shift{7, -3});
  CHECK(r.iou == 1.0);

  r = AlignTranslation(sim, BinaryMask(96, 80), p);
  CHECK(r.shift == Shift{0, 0});
  CHECK(r.iou == 0.0);
  CHECK_THROWS_AS(AlignTranslation(sim, BinaryMask(5, 5), p), DimensionMismatch);
}

TEST_CASE("align_translation agrees with brute-force search") {
  Rng rng(3);
  for (int trial = 0; trial < 6; ++trial) {
    const int w = rng.UniformInt(60, 140), h = rng.UniformInt(40, 70);
    const BinaryMask sim = RandomBlob(w, h, 10, rng);
    BinaryMask learned = OracleShift(sim, rng.UniformInt(-7, 7), rng.UniformInt(-7, 7));
    for (auto& b : learned.bits) if (rng.Uniform() < 0.05) b ^= 1;
    FusionParams p;
    p.search_radius_px = 8;
    p.search_step_px = 1;
    p.refine = false;
    // Oracle: every shift, exact fraction comparison, same tie rule.
    long bi = -1, bu = 1;
    Shift best;
    for (int dy = -8; dy <= 8; ++dy)
      for (int dx = -8; dx <= 8; ++dx) {
        auto [i, u] = OracleCounts(OracleShift(sim, dx, dy), learned);
        const long ci = u == 0 ? 1 : i, cu = u == 0 ? 1 : u;
        const long lhs = ci * bu, rhs = bi * cu;
        const int m = dx * dx + dy * dy, bm = best.dx * best.dx + best.dy * best.dy;
        if (bi < 0 || lhs > rhs ||
            (lhs == rhs && (m < bm || (m == bm && std::pair(dx, dy) < std::pair(best.dx, best.dy))))) {
          bi = ci;
          bu = cu;
          best = {dx, dy};
        }
      }
    const auto r = AlignTranslation(sim, learned, p);
    CHECK(r.shift == best);
    CHECK(r.iou == doctest::Approx(double(bi) / double(bu)));
  }
}

TEST_CASE("property: shift recovery on the step grid") {
  Rng rng(4);
  FusionParams p;
  for (int trial = 0; trial < 10; ++trial) {
    const BinaryMask m = RandomBlob(100, 90, p.search_radius_px, rng);
    const Shift s{2 * rng.UniformInt(-10, 10), 2 * rng.UniformInt(-10, 10)};
    CHECK(AlignTranslation(m, OracleShift(m, s.dx, s.dy), p).shift == s);
  }
}

TEST_CASE("distance_transform") {
  BinaryMask full(5, 4, true);
  for (double v : DistanceTransform(full).values) CHECK(v == 0.0);
  BinaryMask one(8, 8);
  one.set(0, 0);
  CHECK(DistanceTransform(one).at(3, 4) == 5.0);
  for (double v : DistanceTransform(BinaryMask(6, 3)).values) CHECK(std::isinf(v));

  Rng rng(5);
  for (double density : {0.002, 0.02, 0.3}) {
    const BinaryMask m = RandomNoise(64, 64, density, rng);
    const DistanceField dt = DistanceTransform(m);
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x) CHECK(dt.at(x, y) == OracleDistance(m, x, y));
  }
  // Non-square domain where the only set pixels share one column.
  BinaryMask col(31, 7);
  col.set(17, 2);
  col.set(17, 6);
  const DistanceField dc = DistanceTransform(col);
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 31; ++x) CHECK(dc.at(x, y) == OracleDistance(col, x, y));
}

TEST_CASE("distance_prune") {
  const BinaryMask sim = Block(100, 60, 10, 10, 20, 20);
  const BinaryMask inner = Block(100, 60, 12, 12, 5, 5);
  CHECK(DistancePrune(inner, sim, 12) == inner);

  // Near fringe 4 px right of sim, spurious blob 30 px right of it.
  const BinaryMask fringe = Block(100, 60, 30, 15, 4, 4);
  const BinaryMask blob = Block(100, 60, 59, 15, 5, 5);
  const BinaryMask pruned = DistancePrune(Union(fringe, blob), sim, 12);
  CHECK(pruned == fringe);
  CHECK(DistancePrune(Union(fringe, blob), BinaryMask(100, 60), 12).empty());
  CHECK_THROWS_AS(DistancePrune(fringe, BinaryMask(3, 3), 1), DimensionMismatch);
}

TEST_CASE("property: prune monotone in tau") {
  Rng rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const BinaryMask sim = RandomBlob(80, 60, 5, rng), learned = RandomNoise(80, 60, 0.3, rng);
    BinaryMask prev = DistancePrune(learned, sim, 0.5);
    for (double tau : {1.0, 2.5, 6.0, 12.0, 40.0}) {
      const BinaryMask cur = DistancePrune(learned, sim, tau);
      CHECK(IsSubset(prev, cur));
      prev = cur;
    }
  }
}

TEST_CASE("morphological_close") {
  Rng rng(7);
  const BinaryMask m = RandomNoise(30, 20, 0.3, rng);
  CHECK(MorphologicalClose(m, 1) == m);
  BinaryMask holed = Block(40, 40, 10, 10, 20, 20);
  holed.set(20, 20, false);
  CHECK(MorphologicalClose(holed, 3) == Block(40, 40, 10, 10, 20, 20));
  CHECK_THROWS_AS(MorphologicalClose(m, 4), BadKernel);
  CHECK_THROWS_AS(MorphologicalClose(m, 0), BadKernel);
  CHECK_THROWS_AS(MorphologicalClose(m, -3), BadKernel);
}

TEST_CASE("property: closing matches the direct definition, is extensive and idempotent") {
  Rng rng(8);
  for (int trial = 0; trial < 12; ++trial) {
    const int w = rng.UniformInt(5, 40), h = rng.UniformInt(5, 40);
    const BinaryMask m = RandomNoise(w, h, rng.Uniform(0.05, 0.6), rng);
    for (int k : {3, 5, 7}) {
      const BinaryMask c = MorphologicalClose(m, k);
      CHECK(c == OracleClose(m, k));
      CHECK(IsSubset(m, c));
      CHECK(MorphologicalClose(c, k) == c);
    }
  }
}

TEST_CASE("fuse: identical inputs") {
  Rng rng(9);
  const BinaryMask sim = RandomBlob(90, 70, 22, rng);
  FusionParams p;
  const FusionResult r = Fuse(sim, sim, p);
  CHECK(r.fused == MorphologicalClose(sim, p.close_kernel_px));
  CHECK(IsSubset(sim, r.fused));
  CHECK_FALSE(r.flagged);
  CHECK(r.aligned_iou == 1.0);
}

TEST_CASE("fuse: repairs miscalibrated sim and noisy learned mask") {
  // Ground truth: arm body plus a gripper block.
  const int w = 160, h = 120;
  const BinaryMask body = Block(w, h, 40, 40, 50, 25);
  const BinaryMask gripper = Block(w, h, 90, 45, 12, 14);
  const BinaryMask gt = Union(body, gripper);
  // Sim sees everything, but 6 px left and 4 px low of where it should be.
  const BinaryMask sim = OracleShift(gt, -6, 4);
  // Learned mask misses the gripper and adds a blob far away.
  const BinaryMask learned = Union(body, Block(w, h, 135, 95, 10, 10));

  FusionParams p;
  const FusionResult r = Fuse(sim, learned, p);
  CHECK(r.shift == Shift{6, -4});
  CHECK(IsSubset(gt, r.fused));
  CHECK(r.fused.get(140, 100) == false);
  const double fused_iou = Iou(r.fused, gt);
  CHECK(fused_iou > Iou(sim, gt));
  CHECK(fused_iou > Iou(learned, gt));
  CHECK_FALSE(r.flagged);
}

TEST_CASE("fuse: unrelated masks are flagged; superset and determinism") {
  const BinaryMask sim = Block(120, 80, 5, 5, 20, 20);
  const BinaryMask learned = Block(120, 80, 80, 40, 30, 30);
  FusionParams p;
  const FusionResult r = Fuse(sim, learned, p);
  CHECK(r.flagged);
  CHECK(r.aligned_iou < p.flag_iou_threshold);

  Rng rng(10);
  for (int trial = 0; trial < 6; ++trial) {
    const BinaryMask s = RandomBlob(80, 64, 4, rng), l = RandomNoise(80, 64, 0.2, rng);
    const FusionResult a = Fuse(s, l, p), b = Fuse(s, l, p);
    CHECK(IsSubset(ShiftMask(s, a.shift), a.fused));
    CHECK(a.fused == b.fused);
    CHECK(a.shift == b.shift);
    CHECK(a.aligned_iou == b.aligned_iou);
    CHECK(a.flagged == (a.aligned_iou < p.flag_iou_threshold));
  }
}

TEST_CASE("fusion params validation") {
  FusionParams p;
  p.search_step_px = 0;
  CHECK_THROWS_AS(p.Validate(), ConfigError);
  p = {};
  p.search_radius_px = 1;
  CHECK_THROWS_AS(p.Validate(), ConfigError);
  p = {};
  p.close_kernel_px = 4;
  CHECK_THROWS_AS(p.Validate(), ConfigError);
  p = {};
  p.prune_tau_px = 0;
  CHECK_THROWS_AS(p.Validate(), ConfigError);
  p = {};
  p.flag_iou_threshold = 1.5;
  CHECK_THROWS_AS(Fuse(BinaryMask(3, 3), BinaryMask(3, 3), p), ConfigError);
}
