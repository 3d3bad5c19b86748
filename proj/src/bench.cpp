#include "crosspaint/bench.hpp"

#include <cstdio>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "crosspaint/synth.hpp"

namespace crosspaint {

namespace fs = std::filesystem;

BenchReport RunBench(const BenchOptions& options, AugmentConfig config) {
  if (options.worker_counts.empty()) throw ConfigError("bench needs at least one worker count");
  const bool temporary = options.work_dir.empty();
  const fs::path work = temporary ? fs::temp_directory_path() / ("crosspaint_bench_" + std::to_string(::getpid()))
                                  : options.work_dir;
  fs::remove_all(work);
  fs::create_directories(work);

  config.targets = options.targets;
  const RobotRegistry registry = RobotRegistry::FromConfig(config);
  synth::DatasetSpec spec;
  spec.clips = options.clips;
  spec.frames = options.frames;
  spec.width = options.width;
  spec.height = options.height;
  spec.seed = options.seed;
  spec.calibration_error_px = 3;
  synth::GenerateDataset(work / "data", spec, registry.at(options.source_robot), options.source_robot);

  BenchReport report;
  report.hardware_threads = std::thread::hardware_concurrency();
  for (int w : options.worker_counts) {
    AugmentConfig c = config;
    c.workers = w;
    c.output_root = work / ("out_w" + std::to_string(w));
    fs::remove_all(c.output_root);
    const JobPlan plan = PlanJobs(work / "data", c, registry);
    BenchRun run;
    run.workers = w;
    run.report = RunBatch(plan, c, registry, c.output_root);
    run.elapsed_s = run.report.elapsed_s;
    run.clips_per_minute = run.report.clips_per_minute();
    run.tree_hash = TreeHash(c.output_root);
    report.runs.push_back(std::move(run));
  }
  report.identical_outputs = true;
  for (const auto& r : report.runs) report.identical_outputs &= r.tree_hash == report.runs.front().tree_hash;
  const BenchRun& first = report.runs.front();
  const BenchRun& last = report.runs.back();
  report.speedup = last.elapsed_s > 0 ? first.elapsed_s / last.elapsed_s : 0.0;
  report.efficiency = report.speedup * first.workers / last.workers;
  if (temporary) fs::remove_all(work);
  return report;
}

std::string BenchReportText(const BenchOptions& options, const BenchReport& report) {
  std::ostringstream s;
  char line[256];
  std::snprintf(line, sizeof line, "bench: %d clips x %d frames at %dx%d, %zu target robots, %u hardware threads\n",
                options.clips, options.frames, options.width, options.height, options.targets.size(),
                report.hardware_threads);
  s << line;
  for (const auto& r : report.runs) {
    const std::size_t jobs = r.report.jobs.size();
    std::snprintf(line, sizeof line,
                  "  workers %2d: %8.2f s  %7.2f clips/min  %6.2f s per clip per robot  hash %016llx  "
                  "(augmented %zu, flagged %zu, discarded %zu, failed %zu)\n",
                  r.workers, r.elapsed_s, r.clips_per_minute, jobs ? r.elapsed_s * r.workers / double(jobs) : 0.0,
                  static_cast<unsigned long long>(r.tree_hash), r.report.count(Disposition::kAugmented),
                  r.report.count(Disposition::kFlaggedLowQuality), r.report.count(Disposition::kDiscardedUnreachable),
                  r.report.count(Disposition::kFailed));
    s << line;
  }
  std::snprintf(line, sizeof line, "  outputs identical across worker counts: %s\n",
                report.identical_outputs ? "yes" : "NO");
  s << line;
  if (report.runs.size() > 1) {
    std::snprintf(line, sizeof line, "  speedup %d -> %d workers: %.2fx (efficiency %.2f)\n",
                  report.runs.front().workers, report.runs.back().workers, report.speedup, report.efficiency);
    s << line;
  }
  std::snprintf(line, sizeof line,
                "  reference (different hardware, informational): ~%.0f s per clip per robot, up to %.0f clips/min "
                "at %d workers\n",
                kReferenceSecondsPerClipPerRobot, kReferenceClipsPerMinute, kReferenceWorkers);
  s << line;
  return s.str();
}

}  // namespace crosspaint
