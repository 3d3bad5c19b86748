#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "crosspaint/config.hpp"
#include "crosspaint/container.hpp"

namespace crosspaint {

enum class JobStages {
  kFull,       // masks, background, tuning, replay, render, composite
  kMasksOnly,  // source masks and fusion
};

struct JobSpec {
  std::string trajectory_id;
  std::filesystem::path container_dir;
  std::string target_robot;
  JobStages stages = JobStages::kFull;
};

struct InvalidEntry {
  std::filesystem::path dir;
  std::string reason;
};

struct JobPlan {
  std::vector<JobSpec> jobs;  // ordered by trajectory id, then robot id
  std::vector<InvalidEntry> invalid;
};

// Trajectories x targets. Invalid containers are listed, not fatal. Throws
// EmptyDataset when no valid container is found and ConfigError for an
// unknown target.
JobPlan PlanJobs(const std::filesystem::path& dataset_root, const AugmentConfig& config,
                 const RobotRegistry& registry);

enum class Disposition { kAugmented, kDiscardedUnreachable, kFlaggedLowQuality, kFailed };
const char* DispositionName(Disposition d);

struct JobReport {
  std::string trajectory_id;
  std::string target_robot;
  Disposition disposition = Disposition::kFailed;
  std::string failed_stage;  // set for kFailed
  std::string error;
  double max_error_m = std::numeric_limits<double>::infinity();
  double wall_time_s = 0.0;
  std::size_t frames = 0;
  std::size_t flagged_frames = 0;
  std::vector<std::string> warnings;
};

struct RunReport {
  std::vector<JobReport> jobs;  // in plan order
  std::vector<InvalidEntry> invalid;
  int workers = 1;
  double elapsed_s = 0.0;

  std::size_t count(Disposition d) const;
  // Augmented plus flagged over all jobs.
  double accepted_fraction() const;
  // Among accepted jobs, the share whose max replay error is below 0.25 cm.
  double under_quarter_cm_fraction() const;
  // Accepted clips per elapsed minute.
  double clips_per_minute() const;
};

// Where a trajectory's outputs go: the container itself, or a mirror
// directory under the configured output root.
std::filesystem::path OutputDir(const AugmentConfig& config, const std::string& trajectory_id,
                                const std::filesystem::path& container_dir);

// Per-trajectory work shared by every target robot of that trajectory.
struct PreparedTrajectory {
  Container container;
  std::vector<BinaryMask> sim_masks;    // source robot rendered at its recovered joints
  std::vector<BinaryMask> final_masks;  // fused when learned masks exist, else sim
  std::vector<double> aligned_iou;      // empty without learned masks
  std::size_t flagged_frames = 0;
  std::vector<RgbImage> backgrounds;
  std::vector<std::string> warnings;
};

// Stages (a) to (c) for one container, writing masks_fused/ and background/.
// Errors propagate as StageError.
PreparedTrajectory PrepareTrajectory(const std::filesystem::path& container_dir,
                                     const AugmentConfig& config, const RobotRegistry& registry,
                                     bool with_background = true);

class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// Stages (d) to (h) for one target robot on a prepared trajectory. Never
// throws: failures become a kFailed report.
JobReport RunJob(const JobSpec& job, const PreparedTrajectory& prepared,
                 const AugmentConfig& config, const RobotRegistry& registry);

// Runs the plan on config.workers threads. Output bytes do not depend on the
// worker count. Writes run_report.json and run_summary.txt under
// `report_dir` when it is non-empty.
RunReport RunBatch(const JobPlan& plan, const AugmentConfig& config, const RobotRegistry& registry,
                   const std::filesystem::path& report_dir = {});

std::string RunReportJson(const RunReport& report);
std::string RunReportSummary(const RunReport& report);

// FNV-1a over sorted relative paths and file bytes, skipping the run report
// files (they carry timings).
std::uint64_t TreeHash(const std::filesystem::path& root);

}  // namespace crosspaint
