#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "crosspaint/config.hpp"
#include "crosspaint/pipeline.hpp"

namespace crosspaint {

struct BenchOptions {
  int clips = 20;
  int frames = 50;
  int width = 640;
  int height = 480;
  std::string source_robot = "arm6a";
  std::vector<std::string> targets = {"arm6b", "arm6c"};
  std::vector<int> worker_counts = {1, 4};
  std::uint64_t seed = 7;
  std::filesystem::path work_dir;  // empty: a fresh temporary directory, removed afterwards
};

struct BenchRun {
  int workers = 1;
  double elapsed_s = 0.0;
  double clips_per_minute = 0.0;
  std::uint64_t tree_hash = 0;
  RunReport report;
};

struct BenchReport {
  std::vector<BenchRun> runs;
  bool identical_outputs = false;
  // First worker count's elapsed time over the last one's.
  double speedup = 0.0;
  double efficiency = 0.0;
  unsigned hardware_threads = 0;
};

// Reference figures quoted for comparison only; hardware differs.
inline constexpr double kReferenceSecondsPerClipPerRobot = 25.0;
inline constexpr double kReferenceClipsPerMinute = 75.0;
inline constexpr int kReferenceWorkers = 32;

// Generates a synthetic dataset, then augments it once per worker count into
// separate output roots and compares their tree hashes.
BenchReport RunBench(const BenchOptions& options, AugmentConfig config);
std::string BenchReportText(const BenchOptions& options, const BenchReport& report);

}  // namespace crosspaint
