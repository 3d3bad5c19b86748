#pragma once

#include <cstdint>
#include <random>

namespace crosspaint {

// Seeded generator with platform-independent real/int draws. The standard
// distributions are implementation-defined, so synthetic data and tests draw
// through these helpers to stay reproducible across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double Uniform() { return double(engine_() >> 11) * 0x1.0p-53; }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Integer in [lo, hi].
  int UniformInt(int lo, int hi) {
    const auto span = std::uint64_t(std::int64_t(hi) - lo + 1);
    return int(std::int64_t(lo) + std::int64_t(engine_() % span));
  }
  std::uint64_t Next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace crosspaint
