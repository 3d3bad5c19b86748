#include "crosspaint/pipeline.hpp"

#include <algorithm>
#include <condition_variable>
#include <chrono>
#include <fstream>
#include <deque>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "crosspaint/composite.hpp"
#include "json_util.hpp"

namespace crosspaint {

namespace fs = std::filesystem;
using detail::json;

const char* DispositionName(Disposition d) {
  switch (d) {
    case Disposition::kAugmented: return "augmented";
    case Disposition::kDiscardedUnreachable: return "discarded_unreachable";
    case Disposition::kFlaggedLowQuality: return "flagged_low_quality";
    case Disposition::kFailed: return "failed";
  }
  return "failed";
}

std::size_t RunReport::count(Disposition d) const {
  return std::size_t(std::count_if(jobs.begin(), jobs.end(), [d](const JobReport& j) { return j.disposition == d; }));
}

namespace {

bool Accepted(const JobReport& j) {
  return j.disposition == Disposition::kAugmented || j.disposition == Disposition::kFlaggedLowQuality;
}

}  // namespace

double RunReport::accepted_fraction() const {
  if (jobs.empty()) return 0.0;
  return double(std::count_if(jobs.begin(), jobs.end(), Accepted)) / double(jobs.size());
}

double RunReport::under_quarter_cm_fraction() const {
  std::size_t accepted = 0, under = 0;
  for (const auto& j : jobs) {
    if (!Accepted(j)) continue;
    ++accepted;
    under += j.max_error_m < 0.0025;
  }
  return accepted == 0 ? 0.0 : double(under) / double(accepted);
}

double RunReport::clips_per_minute() const {
  const auto done = std::count_if(jobs.begin(), jobs.end(), Accepted);
  return elapsed_s > 0 ? double(done) / (elapsed_s / 60.0) : 0.0;
}

JobPlan PlanJobs(const fs::path& dataset_root, const AugmentConfig& config, const RobotRegistry& registry) {
  for (const auto& t : config.targets) registry.at(t);
  JobPlan plan;
  std::vector<std::pair<std::string, fs::path>> valid;
  for (const auto& dir : DiscoverContainers(dataset_root)) {
    const auto problems = ValidateContainer(dir);
    if (!problems.empty()) {
      plan.invalid.push_back({dir, problems.front()});
      continue;
    }
    valid.emplace_back(dir.filename().string(), dir);
  }
  if (valid.empty()) {
    throw EmptyDataset("no valid trajectory container under " + dataset_root.string() +
                       (plan.invalid.empty() ? "" : " (" + std::to_string(plan.invalid.size()) + " invalid)"));
  }
  std::sort(valid.begin(), valid.end());
  std::vector<std::string> targets = config.targets;
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  for (const auto& [id, dir] : valid) {
    for (const auto& robot : targets) plan.jobs.push_back({id, dir, robot, JobStages::kFull});
  }
  return plan;
}

fs::path OutputDir(const AugmentConfig& config, const std::string& trajectory_id, const fs::path& container_dir) {
  return config.output_root.empty() ? container_dir : config.output_root / trajectory_id;
}

namespace {

// Runs `fn`, rethrowing any library or I/O failure as a StageError for `stage`.
template <typename Fn>
auto Stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

std::vector<double> Fingers(const RobotModel& m, double fraction) {
  return m.gripper ? MapGripper(fraction, *m.gripper) : std::vector<double>{};
}

}  // namespace

PreparedTrajectory PrepareTrajectory(const fs::path& container_dir, const AugmentConfig& config,
                                     const RobotRegistry& registry, bool with_background) {
  PreparedTrajectory p;
  p.container = Stage("load", [&] { return ReadContainer(container_dir); });
  const Container& c = p.container;
  const fs::path out = OutputDir(config, c.trajectory.id, c.dir);
  const std::size_t n = c.meta.frame_count;

  const RobotModel& source = Stage("source_replay", [&]() -> const RobotModel& { return registry.at(c.meta.robot); });
  const ReplayResult source_joints = Stage("source_replay", [&] {
    return ReplayTrajectory(source, c.meta.source_base, c.trajectory, config.ik);
  });
  if (source_joints.max_pos_error_m >= config.base_tuning.error_cutoff_m) {
    p.warnings.push_back("source robot tracks its own poses only to " +
                         std::to_string(source_joints.max_pos_error_m) + " m; source masks may be off");
  }
  Stage("render_source", [&] {
    for (std::size_t t = 0; t < n; ++t) {
      p.sim_masks.push_back(RasterizeRobot(source, source_joints.joint_configs[t], c.meta.source_base,
                                           c.meta.camera, Fingers(source, c.trajectory.gripper_fractions[t]))
                                .mask);
    }
  });

  Stage("fuse", [&] {
    if (!c.has_learned_masks) {
      p.final_masks = p.sim_masks;
      return;
    }
    const auto learned = ReadMaskSequence(c.dir / "masks_learned", n);
    for (std::size_t t = 0; t < n; ++t) {
      FusionResult r = Fuse(p.sim_masks[t], learned[t], config.fusion);
      p.aligned_iou.push_back(r.aligned_iou);
      p.flagged_frames += r.flagged;
      p.final_masks.push_back(std::move(r.fused));
    }
  });
  Stage("write", [&] { WriteMaskSequence(out / "masks_fused", p.final_masks); });
  if (!with_background) return p;

  Stage("inpaint", [&] {
    const auto frames = ReadFrames(c);
    InpaintOutcome r = InpaintTrajectory(c.dir, frames, p.final_masks, config.inpaint);
    if (r.warning) p.warnings.push_back(*r.warning);
    p.backgrounds = std::move(r.backgrounds);
  });
  Stage("write", [&] { WriteFrameSequence(out / "background", p.backgrounds); });
  return p;
}

namespace {

json ReplayJson(const JobSpec& job, const Container& c, const BaseTuningResult& tuned,
                const ReplayResult& replay) {
  json frames = json::array();
  for (std::size_t t = 0; t < replay.joint_configs.size(); ++t) {
    const JointConfig& q = replay.joint_configs[t];
    frames.push_back({{"q", std::vector<double>(q.data(), q.data() + q.size())},
                      {"position_error_m", replay.per_frame_pos_error_m[t]},
                      {"orientation_error_rad", replay.per_frame_rot_error_rad[t]},
                      {"gripper", replay.gripper_configs[t]},
                      {"action", json::parse(c.trajectory.actions[t])}});
  }
  const Vec3& d = tuned.base_translation_delta;
  return {{"trajectory", job.trajectory_id},
          {"robot", job.target_robot},
          {"source_robot", c.meta.robot},
          {"base_pose", detail::PoseToJson(tuned.base_pose)},
          {"base_translation_delta", {d.x(), d.y(), d.z()}},
          {"max_error_m", replay.max_pos_error_m},
          {"tuning",
           {{"iterations_used", tuned.iterations_used},
            {"feasible", tuned.feasible},
            {"max_error_m", tuned.max_error_m},
            {"error_trace", tuned.error_trace}}},
          {"frames", frames}};
}

}  // namespace

JobReport RunJob(const JobSpec& job, const PreparedTrajectory& prepared, const AugmentConfig& config,
                 const RobotRegistry& registry) {
  const auto start = std::chrono::steady_clock::now();
  JobReport report;
  report.trajectory_id = job.trajectory_id;
  report.target_robot = job.target_robot;
  report.warnings = prepared.warnings;
  const Container& c = prepared.container;
  const std::size_t n = c.meta.frame_count;
  report.frames = n;
  report.flagged_frames = prepared.flagged_frames;
  const bool low_quality = prepared.flagged_frames * 10 > n;
  const fs::path aug = OutputDir(config, c.trajectory.id, c.dir) / "aug" / job.target_robot;

  try {
    if (job.stages == JobStages::kMasksOnly) {
      report.disposition = low_quality ? Disposition::kFlaggedLowQuality : Disposition::kAugmented;
    } else {
      const RobotModel& target = Stage("tune_base", [&]() -> const RobotModel& { return registry.at(job.target_robot); });
      Stage("write", [&] {
        std::error_code ec;
        fs::remove_all(aug, ec);
      });
      const BaseTuningResult tuned = Stage("tune_base", [&] {
        return TuneBase(target, c.trajectory, c.meta.source_base, config.base_tuning, config.ik);
      });
      report.max_error_m = tuned.max_error_m;
      if (ClassifyTrajectory(tuned) == TrajectoryDisposition::kDiscarded) {
        report.disposition = Disposition::kDiscardedUnreachable;
      } else {
        const ReplayResult replay =
            Stage("replay", [&] { return ReplayTrajectory(target, tuned.base_pose, c.trajectory, config.ik); });
        report.max_error_m = replay.max_pos_error_m;
        Stage("write", [&] { fs::create_directories(aug / "frames"); });
        for (std::size_t t = 0; t < n; ++t) {
          const RenderOutput render = Stage("render", [&] {
            return RasterizeRobot(target, replay.joint_configs[t], tuned.base_pose, c.meta.camera,
                                  replay.gripper_configs[t]);
          });
          const AugmentedFrame frame =
              Stage("composite", [&] { return CompositeFrame(prepared.backgrounds.at(t), render, config.composite); });
          Stage("write", [&] { WritePng(frame.image, aug / "frames" / FrameFileName(t)); });
        }
        Stage("write", [&] { detail::WriteJsonFile(aug / "replay.json", ReplayJson(job, c, tuned, replay)); });
        report.disposition = low_quality ? Disposition::kFlaggedLowQuality : Disposition::kAugmented;
      }
    }
  } catch (const StageError& e) {
    report.disposition = Disposition::kFailed;
    report.failed_stage = e.stage();
    report.error = e.what();
  }
  report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

namespace {

// Preparing a trajectory and running one of its jobs are separate tasks.
// Workers take a ready job when there is one, so a trajectory's memory is
// released early, and otherwise start the next preparation. Nobody blocks on
// a preparation another worker is running while other work is available.
class Scheduler {
 public:
  struct Slot {
    std::vector<std::size_t> jobs;  // plan indices, plan order
    std::shared_ptr<const PreparedTrajectory> prepared;
    std::exception_ptr error;
    double prepare_s = 0.0;
    std::size_t remaining = 0;
  };

  explicit Scheduler(const JobPlan& plan) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < plan.jobs.size(); ++i) {
      auto [it, fresh] = index.try_emplace(plan.jobs[i].trajectory_id, slots_.size());
      if (fresh) slots_.emplace_back();
      slots_[it->second].jobs.push_back(i);
      ++slots_[it->second].remaining;
    }
  }

  // Either a slot to prepare or a job to run; nullopt when all work is done.
  struct Task {
    std::size_t slot;
    std::optional<std::size_t> job;
  };

  std::optional<Task> Next() {
    std::unique_lock lock(mutex_);
    for (;;) {
      if (!ready_.empty()) {
        const Task t = ready_.front();
        ready_.pop_front();
        return t;
      }
      if (next_slot_ < slots_.size()) {
        ++in_flight_;
        return Task{next_slot_++, std::nullopt};
      }
      if (in_flight_ == 0) return std::nullopt;
      cv_.wait(lock);
    }
  }

  Slot& slot(std::size_t s) { return slots_[s]; }

  void Prepared(std::size_t s) {
    std::lock_guard lock(mutex_);
    --in_flight_;
    for (std::size_t j : slots_[s].jobs) ready_.push_back(Task{s, j});
    cv_.notify_all();
  }

  void JobDone(std::size_t s) {
    std::lock_guard lock(mutex_);
    if (--slots_[s].remaining == 0) slots_[s].prepared.reset();
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::vector<Slot> slots_;
  std::deque<Task> ready_;
  std::size_t next_slot_ = 0;
  std::size_t in_flight_ = 0;
};

JobReport FailedReport(const JobSpec& job, std::string stage, const std::string& what) {
  JobReport r;
  r.trajectory_id = job.trajectory_id;
  r.target_robot = job.target_robot;
  r.disposition = Disposition::kFailed;
  r.failed_stage = std::move(stage);
  r.error = what;
  return r;
}

}  // namespace

RunReport RunBatch(const JobPlan& plan, const AugmentConfig& config, const RobotRegistry& registry,
                   const fs::path& report_dir) {
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.invalid = plan.invalid;
  report.workers = std::max(1, config.workers);
  report.jobs.resize(plan.jobs.size());
  Scheduler scheduler(plan);
  auto seconds_since = [](auto t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  auto prepare = [&](std::size_t s) {
    Scheduler::Slot& slot = scheduler.slot(s);
    const JobSpec& first = plan.jobs[slot.jobs.front()];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      slot.prepared = std::make_shared<const PreparedTrajectory>(
          PrepareTrajectory(first.container_dir, config, registry, first.stages == JobStages::kFull));
    } catch (...) {
      slot.error = std::current_exception();
    }
    slot.prepare_s = seconds_since(t0);
  };

  auto run = [&](std::size_t s, std::size_t i) {
    const Scheduler::Slot& slot = scheduler.slot(s);
    const JobSpec& job = plan.jobs[i];
    const auto t0 = std::chrono::steady_clock::now();
    JobReport r;
    try {
      if (slot.error) std::rethrow_exception(slot.error);
      r = RunJob(job, *slot.prepared, config, registry);
    } catch (const StageError& e) {
      r = FailedReport(job, e.stage(), e.what());
    } catch (const std::exception& e) {
      r = FailedReport(job, "internal", e.what());
    }
    // Each job is charged the shared preparation of its trajectory.
    r.wall_time_s = slot.prepare_s + seconds_since(t0);
    report.jobs[i] = std::move(r);
  };

  auto worker = [&] {
    while (const auto task = scheduler.Next()) {
      if (task->job) {
        run(task->slot, *task->job);
        scheduler.JobDone(task->slot);
      } else {
        prepare(task->slot);
        scheduler.Prepared(task->slot);
      }
    }
  };
  const int threads = std::min<int>(report.workers, int(std::max<std::size_t>(1, plan.jobs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  report.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!report_dir.empty()) {
    fs::create_directories(report_dir);
    std::ofstream(report_dir / "run_report.json") << RunReportJson(report);
    std::ofstream(report_dir / "run_summary.txt") << RunReportSummary(report);
  }
  return report;
}

std::string RunReportJson(const RunReport& report) {
  json jobs = json::array();
  for (const auto& j : report.jobs) {
    json e = {{"trajectory", j.trajectory_id},
              {"robot", j.target_robot},
              {"disposition", DispositionName(j.disposition)},
              {"max_error_m", std::isfinite(j.max_error_m) ? json(j.max_error_m) : json(nullptr)},
              {"wall_time_s", j.wall_time_s},
              {"frames", j.frames},
              {"flagged_frames", j.flagged_frames},
              {"warnings", j.warnings}};
    if (j.disposition == Disposition::kFailed) {
      e["failed_stage"] = j.failed_stage;
      e["error"] = j.error;
    }
    jobs.push_back(std::move(e));
  }
  json invalid = json::array();
  for (const auto& i : report.invalid) invalid.push_back({{"dir", i.dir.string()}, {"reason", i.reason}});
  json counts = json::object();
  for (auto d : {Disposition::kAugmented, Disposition::kDiscardedUnreachable, Disposition::kFlaggedLowQuality,
                 Disposition::kFailed}) {
    counts[DispositionName(d)] = report.count(d);
  }
  const json out = {{"workers", report.workers},
                    {"elapsed_s", report.elapsed_s},
                    {"jobs", jobs},
                    {"invalid_containers", invalid},
                    {"aggregate",
                     {{"job_count", report.jobs.size()},
                      {"dispositions", counts},
                      {"accepted_fraction", report.accepted_fraction()},
                      {"under_0_25cm_fraction", report.under_quarter_cm_fraction()},
                      {"clips_per_minute", report.clips_per_minute()}}}};
  return out.dump(2) + "\n";
}

std::string RunReportSummary(const RunReport& report) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(3);
  s << "jobs: " << report.jobs.size() << "  workers: " << report.workers << "  elapsed: " << report.elapsed_s
    << " s\n";
  for (auto d : {Disposition::kAugmented, Disposition::kFlaggedLowQuality, Disposition::kDiscardedUnreachable,
                 Disposition::kFailed}) {
    s << "  " << DispositionName(d) << ": " << report.count(d) << "\n";
  }
  s << "accepted fraction: " << report.accepted_fraction() << "\n";
  s << "accepted with max replay error < 0.25 cm: " << report.under_quarter_cm_fraction() << "\n";
  s << "throughput: " << report.clips_per_minute() << " clips/min\n";
  if (!report.invalid.empty()) {
    s << "invalid containers:\n";
    for (const auto& i : report.invalid) s << "  " << i.dir.string() << ": " << i.reason << "\n";
  }
  for (const auto& j : report.jobs) {
    s << j.trajectory_id << " -> " << j.target_robot << ": " << DispositionName(j.disposition);
    if (std::isfinite(j.max_error_m)) s << "  max error " << j.max_error_m * 100 << " cm";
    if (j.flagged_frames) s << "  flagged " << j.flagged_frames << "/" << j.frames;
    if (j.disposition == Disposition::kFailed) s << "  [" << j.failed_stage << "] " << j.error;
    s << "  (" << j.wall_time_s << " s)\n";
    for (const auto& w : j.warnings) s << "    warning: " << w << "\n";
  }
  return s.str();
}

std::uint64_t TreeHash(const fs::path& root) {
  std::vector<std::pair<std::string, fs::path>> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = fs::relative(e.path(), root).generic_string();
    if (rel == "run_report.json" || rel == "run_summary.txt") continue;
    files.emplace_back(rel, e.path());
  }
  std::sort(files.begin(), files.end());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const char* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      h ^= std::uint8_t(data[i]);
      h *= 0x100000001b3ULL;
    }
  };
  std::vector<char> buf(1 << 16);
  for (const auto& [rel, path] : files) {
    mix(rel.c_str(), rel.size() + 1);
    std::ifstream f(path, std::ios::binary);
    while (f) {
      f.read(buf.data(), std::streamsize(buf.size()));
      mix(buf.data(), std::size_t(f.gcount()));
    }
    const char sep = '\n';
    mix(&sep, 1);
  }
  return h;
}

}  // namespace crosspaint
