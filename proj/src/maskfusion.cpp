#include "crosspaint/maskfusion.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>

namespace crosspaint {

void FusionParams::Validate() const {
  if (search_step_px < 1 || search_radius_px < search_step_px) {
    throw ConfigError("fusion search needs radius >= step >= 1");
  }
  if (!(prune_tau_px > 0)) throw ConfigError("fusion prune tau must be positive");
  if (close_kernel_px < 1 || close_kernel_px % 2 == 0) {
    throw ConfigError("fusion closing kernel must be odd and >= 1");
  }
  if (!(flag_iou_threshold >= 0 && flag_iou_threshold <= 1)) {
    throw ConfigError("fusion flag threshold must lie in [0, 1]");
  }
}

double Iou(const BinaryMask& a, const BinaryMask& b) {
  RequireSameSize(a, b, "Iou");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.bits.size(); ++i) {
    inter += a.bits[i] & b.bits[i];
    uni += a.bits[i] | b.bits[i];
  }
  return uni == 0 ? 1.0 : double(inter) / double(uni);
}

BinaryMask ShiftMask(const BinaryMask& m, Shift s) {
  BinaryMask out(m.width, m.height);
  for (int y = 0; y < m.height; ++y) {
    const int sy = y - s.dy;
    if (sy < 0 || sy >= m.height) continue;
    for (int x = 0; x < m.width; ++x) {
      const int sx = x - s.dx;
      if (sx >= 0 && sx < m.width && m.get(sx, sy)) out.set(x, y);
    }
  }
  return out;
}

namespace {

// Rows packed 64 pixels per word; padding bits are always zero.
struct Packed {
  int width = 0;
  int height = 0;
  int words = 0;
  std::vector<std::uint64_t> data;

  const std::uint64_t* row(int y) const { return data.data() + std::size_t(y) * std::size_t(words); }
};

Packed Pack(const BinaryMask& m) {
  Packed p{m.width, m.height, (m.width + 63) / 64, {}};
  p.data.assign(std::size_t(p.words) * std::size_t(m.height), 0);
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      if (m.get(x, y)) p.data[std::size_t(y) * std::size_t(p.words) + std::size_t(x >> 6)] |= std::uint64_t(1) << (x & 63);
    }
  }
  return p;
}

// Horizontal shift by dx of every row.
Packed ShiftColumns(const Packed& src, int dx) {
  Packed out{src.width, src.height, src.words, std::vector<std::uint64_t>(src.data.size(), 0)};
  const int word_shift = std::abs(dx) >> 6, bit_shift = std::abs(dx) & 63;
  const int tail = src.width & 63;
  const std::uint64_t tail_mask = tail == 0 ? ~std::uint64_t(0) : (std::uint64_t(1) << tail) - 1;
  for (int y = 0; y < src.height; ++y) {
    const std::uint64_t* in = src.row(y);
    std::uint64_t* o = out.data.data() + std::size_t(y) * std::size_t(src.words);
    for (int w = 0; w < src.words; ++w) {
      std::uint64_t v = 0;
      if (dx >= 0) {
        const int s = w - word_shift;
        if (s >= 0) v = in[s] << bit_shift;
        if (bit_shift && s - 1 >= 0) v |= in[s - 1] >> (64 - bit_shift);
      } else {
        const int s = w + word_shift;
        if (s < src.words) v = in[s] >> bit_shift;
        if (bit_shift && s + 1 < src.words) v |= in[s + 1] << (64 - bit_shift);
      }
      o[w] = v;
    }
    o[src.words - 1] &= tail_mask;
  }
  return out;
}

struct Score {
  std::uint64_t inter = 0;
  std::uint64_t uni = 0;

  // iou as an exact fraction, with 0/0 read as 1.
  bool Better(const Score& o) const {
    const std::uint64_t ln = uni == 0 ? 1 : inter, ld = uni == 0 ? 1 : uni;
    const std::uint64_t rn = o.uni == 0 ? 1 : o.inter, rd = o.uni == 0 ? 1 : o.uni;
    return ln * rd > rn * ld;
  }
  bool Equal(const Score& o) const {
    const std::uint64_t ln = uni == 0 ? 1 : inter, ld = uni == 0 ? 1 : uni;
    const std::uint64_t rn = o.uni == 0 ? 1 : o.inter, rd = o.uni == 0 ? 1 : o.uni;
    return ln * rd == rn * ld;
  }
  double value() const { return uni == 0 ? 1.0 : double(inter) / double(uni); }
};

bool ShiftPreferred(Shift a, Shift b) {
  const int ma = a.dx * a.dx + a.dy * a.dy, mb = b.dx * b.dx + b.dy * b.dy;
  if (ma != mb) return ma < mb;
  return std::pair(a.dx, a.dy) < std::pair(b.dx, b.dy);
}

class ShiftSearch {
 public:
  ShiftSearch(const BinaryMask& sim, const BinaryMask& learned)
      : sim_(Pack(sim)), learned_(Pack(learned)) {
    for (std::uint64_t w : learned_.data) learned_count_ += std::uint64_t(std::popcount(w));
  }

  Score Evaluate(Shift s) {
    const Columns& c = ColumnsFor(s.dx);
    Score score;
    std::uint64_t sim_count = 0;
    const int y0 = std::max(0, s.dy), y1 = std::min(sim_.height, sim_.height + s.dy);
    for (int y = y0; y < y1; ++y) {
      const int sy = y - s.dy;
      sim_count += c.row_counts[std::size_t(sy)];
      const std::uint64_t* a = c.packed.row(sy);
      const std::uint64_t* b = learned_.row(y);
      for (int w = 0; w < sim_.words; ++w) score.inter += std::uint64_t(std::popcount(a[w] & b[w]));
    }
    score.uni = sim_count + learned_count_ - score.inter;
    return score;
  }

 private:
  struct Columns {
    Packed packed;
    std::vector<std::uint64_t> row_counts;
  };

  const Columns& ColumnsFor(int dx) {
    auto it = cache_.find(dx);
    if (it != cache_.end()) return it->second;
    Columns c{ShiftColumns(sim_, dx), std::vector<std::uint64_t>(std::size_t(sim_.height), 0)};
    for (int y = 0; y < sim_.height; ++y) {
      for (int w = 0; w < sim_.words; ++w) c.row_counts[std::size_t(y)] += std::uint64_t(std::popcount(c.packed.row(y)[w]));
    }
    return cache_.emplace(dx, std::move(c)).first->second;
  }

  Packed sim_;
  Packed learned_;
  std::uint64_t learned_count_ = 0;
  std::map<int, Columns> cache_;
};

}  // namespace

AlignmentResult AlignTranslation(const BinaryMask& sim, const BinaryMask& learned,
                                 const FusionParams& params) {
  RequireSameSize(sim, learned, "AlignTranslation");
  params.Validate();
  ShiftSearch search(sim, learned);
  std::optional<std::pair<Shift, Score>> best;
  auto consider = [&](Shift s) {
    const Score sc = search.Evaluate(s);
    if (!best || sc.Better(best->second) ||
        (sc.Equal(best->second) && ShiftPreferred(s, best->first))) {
      best = {s, sc};
    }
  };
  const int r = params.search_radius_px, step = params.search_step_px;
  const int kmax = r / step;
  for (int ky = -kmax; ky <= kmax; ++ky) {
    for (int kx = -kmax; kx <= kmax; ++kx) consider({kx * step, ky * step});
  }
  if (params.refine && step > 1) {
    const Shift center = best->first;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const Shift s{center.dx + dx, center.dy + dy};
        if (std::abs(s.dx) <= r && std::abs(s.dy) <= r) consider(s);
      }
    }
  }
  return {best->first, best->second.value()};
}

namespace {

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher) over one line of
// squared distances; entries of +inf contribute no parabola.
void Envelope1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
                std::vector<double>& z) {
  const int n = int(f.size());
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (std::isinf(f[q])) continue;
    while (k >= 0) {
      const int p = v[k];
      const double s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * q - 2.0 * p);
      if (s <= z[k]) {
        --k;
      } else {
        ++k;
        v[k] = q;
        z[k] = s;
        break;
      }
    }
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -std::numeric_limits<double>::infinity();
    }
  }
  if (k < 0) {
    std::fill(d.begin(), d.end(), std::numeric_limits<double>::infinity());
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (j < k && z[j + 1] < q) ++j;
    const double diff = double(q - v[j]);
    d[q] = diff * diff + f[v[j]];
  }
}

}  // namespace

DistanceField DistanceTransform(const BinaryMask& mask) {
  const int w = mask.width, h = mask.height;
  const double inf = std::numeric_limits<double>::infinity();
  DistanceField out{w, h, std::vector<double>(mask.bits.size(), inf)};
  const int n = std::max(w, h);
  std::vector<double> f, d;
  std::vector<int> v(std::size_t(n) + 1);
  std::vector<double> z(std::size_t(n) + 1);

  f.resize(std::size_t(h));
  d.resize(std::size_t(h));
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) f[y] = mask.get(x, y) ? 0.0 : inf;
    Envelope1d(f, d, v, z);
    for (int y = 0; y < h; ++y) out.values[mask.index(x, y)] = d[y];
  }
  f.resize(std::size_t(w));
  d.resize(std::size_t(w));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f[x] = out.values[mask.index(x, y)];
    Envelope1d(f, d, v, z);
    for (int x = 0; x < w; ++x) out.values[mask.index(x, y)] = std::sqrt(d[x]);
  }
  return out;
}

BinaryMask DistancePrune(const BinaryMask& learned, const BinaryMask& aligned_sim, double tau) {
  RequireSameSize(learned, aligned_sim, "DistancePrune");
  const DistanceField dt = DistanceTransform(aligned_sim);
  BinaryMask out(learned.width, learned.height);
  for (std::size_t i = 0; i < learned.bits.size(); ++i) {
    out.bits[i] = (learned.bits[i] && dt.values[i] <= tau) ? 1 : 0;
  }
  return out;
}

namespace {

// One separable pass of a (2r+1) window along rows (horizontal) or columns.
// Dilation: any set pixel in the in-domain window. Erosion: every in-domain
// pixel of the window set.
BinaryMask WindowPass(const BinaryMask& in, int r, bool horizontal, bool dilate) {
  BinaryMask out(in.width, in.height);
  const int lines = horizontal ? in.height : in.width;
  const int len = horizontal ? in.width : in.height;
  std::vector<int> prefix(std::size_t(len) + 1);
  for (int l = 0; l < lines; ++l) {
    auto at = [&](int i) { return horizontal ? in.index(i, l) : in.index(l, i); };
    for (int i = 0; i < len; ++i) prefix[i + 1] = prefix[i] + in.bits[at(i)];
    for (int i = 0; i < len; ++i) {
      const int lo = std::max(0, i - r), hi = std::min(len - 1, i + r);
      const int set = prefix[hi + 1] - prefix[lo];
      out.bits[at(i)] = dilate ? (set > 0) : (set == hi - lo + 1);
    }
  }
  return out;
}

}  // namespace

BinaryMask Dilate(const BinaryMask& mask, int radius_px) {
  if (radius_px <= 0) return mask;
  return WindowPass(WindowPass(mask, radius_px, true, true), radius_px, false, true);
}

BinaryMask MorphologicalClose(const BinaryMask& mask, int kernel_px) {
  if (kernel_px < 1 || kernel_px % 2 == 0) {
    throw BadKernel("closing kernel must be odd and >= 1, got " + std::to_string(kernel_px));
  }
  if (kernel_px == 1) return mask;
  const int r = kernel_px / 2;
  BinaryMask m = WindowPass(mask, r, true, true);
  m = WindowPass(m, r, false, true);
  m = WindowPass(m, r, true, false);
  return WindowPass(m, r, false, false);
}

FusionResult Fuse(const BinaryMask& sim, const BinaryMask& learned, const FusionParams& params) {
  RequireSameSize(sim, learned, "Fuse");
  params.Validate();
  const AlignmentResult align = AlignTranslation(sim, learned, params);
  const BinaryMask shifted = ShiftMask(sim, align.shift);
  const BinaryMask pruned = DistancePrune(learned, shifted, params.prune_tau_px);
  FusionResult r;
  r.fused = MorphologicalClose(Union(pruned, shifted), params.close_kernel_px);
  r.shift = align.shift;
  r.aligned_iou = align.iou;
  r.flagged = align.iou < params.flag_iou_threshold;
  return r;
}

}  // namespace crosspaint
