#include "crosspaint/cli.hpp"

#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "crosspaint/bench.hpp"
#include "crosspaint/composite.hpp"
#include "crosspaint/pipeline.hpp"
#include "crosspaint/synth.hpp"
#include "json_util.hpp"

namespace crosspaint {

namespace fs = std::filesystem;
using detail::json;

namespace {

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  int workers = 0;
  std::string output_root;
  std::vector<std::string> targets;
};

void AddCommon(CLI::App* cmd, CommonOptions& o, bool with_targets) {
  cmd->add_option("-c,--config", o.config_path, "JSON config file");
  cmd->add_option("--set", o.overrides, "override a config value, e.g. --set fusion.prune_tau_px=10");
  cmd->add_option("-j,--workers", o.workers, "worker threads (overrides config and CROSSPAINT_WORKERS)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("-o,--out", o.output_root, "output root (default: write into the dataset)");
  if (with_targets) cmd->add_option("-t,--targets", o.targets, "target robot ids")->delimiter(',');
}

AugmentConfig BuildConfig(const CommonOptions& o) {
  AugmentConfig c = o.config_path.empty() ? DefaultConfig() : LoadConfig(o.config_path);
  ApplyEnvironment(c);
  for (const auto& s : o.overrides) ApplyOverride(c, s);
  if (o.workers > 0) c.workers = o.workers;
  if (!o.output_root.empty()) c.output_root = o.output_root;
  if (!o.targets.empty()) c.targets = o.targets;
  c.Validate();
  return c;
}

json TuningJson(const BaseTuningResult& r) {
  const Vec3& d = r.base_translation_delta;
  return {{"feasible", r.feasible},
          {"max_error_m", r.max_error_m},
          {"iterations_used", r.iterations_used},
          {"base_translation_delta", {d.x(), d.y(), d.z()}},
          {"base_pose", detail::PoseToJson(r.base_pose)},
          {"error_trace", r.error_trace}};
}

// Sources to process for the single-stage subcommands: every valid
// container, with invalid ones reported on `err`.
std::vector<fs::path> ValidContainers(const fs::path& root, std::ostream& err) {
  std::vector<fs::path> out;
  for (const auto& dir : DiscoverContainers(root)) {
    const auto problems = ValidateContainer(dir);
    if (problems.empty()) {
      out.push_back(dir);
    } else {
      err << "skipping " << dir.string() << ": " << problems.front() << "\n";
    }
  }
  if (out.empty()) throw EmptyDataset("no valid trajectory container under " + root.string());
  return out;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Replace the robot in demonstration videos with other robot arms.", "crosspaint"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  CommonOptions common;
  std::string data;

  auto* augment = app.add_subcommand("augment", "run the full pipeline over a dataset");
  AddCommon(augment, common, true);
  augment->add_option("-d,--data", data, "dataset root or single container")->required();

  std::string robot;
  auto* tune = app.add_subcommand("tune-base", "search a feasible base position for one trajectory");
  AddCommon(tune, common, false);
  tune->add_option("-d,--data", data, "trajectory container")->required();
  tune->add_option("-r,--robot", robot, "target robot id")->required();

  auto* fuse = app.add_subcommand("fuse-masks", "write masks_fused/ for every trajectory");
  AddCommon(fuse, common, false);
  fuse->add_option("-d,--data", data, "dataset root or single container")->required();

  auto* sim = app.add_subcommand("render-sim-masks", "write masks_sim/ rendered from the source robot");
  AddCommon(sim, common, false);
  sim->add_option("-d,--data", data, "dataset root or single container")->required();

  auto* inpaint = app.add_subcommand("inpaint", "write masks_fused/ and background/ for every trajectory");
  AddCommon(inpaint, common, false);
  inpaint->add_option("-d,--data", data, "dataset root or single container")->required();

  int preview_frames = 4;
  std::string preview_dir;
  auto* preview = app.add_subcommand("preview", "composite a few frames of one trajectory for inspection");
  AddCommon(preview, common, false);
  preview->add_option("-d,--data", data, "trajectory container")->required();
  preview->add_option("-r,--robot", robot, "target robot id")->required();
  preview->add_option("-n,--frames", preview_frames, "number of frames, spread over the clip")
      ->check(CLI::PositiveNumber);
  preview->add_option("--preview-dir", preview_dir, "where to write the frames")->required();

  auto* validate = app.add_subcommand("validate", "check trajectory containers");
  validate->add_option("-d,--data", data, "dataset root or single container")->required();

  BenchOptions bench_opts;
  std::string bench_dir;
  auto* bench = app.add_subcommand("bench", "synthetic throughput and determinism benchmark");
  AddCommon(bench, common, false);
  bench->add_option("--clips", bench_opts.clips)->check(CLI::PositiveNumber);
  bench->add_option("--frames", bench_opts.frames)->check(CLI::PositiveNumber);
  bench->add_option("--width", bench_opts.width)->check(CLI::PositiveNumber);
  bench->add_option("--height", bench_opts.height)->check(CLI::PositiveNumber);
  bench->add_option("--bench-targets", bench_opts.targets)->delimiter(',');
  bench->add_option("--worker-counts", bench_opts.worker_counts)->delimiter(',');
  bench->add_option("--work-dir", bench_dir, "keep the generated data and outputs here");

  synth::DatasetSpec spec;
  std::string synth_out, synth_robot = "arm6a";
  std::vector<double> offset;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
  synth_cmd->add_option("-o,--out", synth_out, "dataset root to create")->required();
  synth_cmd->add_option("-r,--robot", synth_robot, "source robot id");
  synth_cmd->add_option("--clips", spec.clips)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--frames", spec.frames)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--width", spec.width)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--height", spec.height)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", spec.seed);
  synth_cmd->add_option("--calibration-error-px", spec.calibration_error_px);
  synth_cmd->add_option("--workspace-offset", offset, "x,y,z in meters")->delimiter(',')->expected(3);
  bool no_learned = false;
  synth_cmd->add_flag("--no-learned-masks", no_learned);
  std::string synth_config;
  synth_cmd->add_option("-c,--config", synth_config, "config naming the robot registry");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;  // --help exits 0
  }

  try {
    if (*validate) {
      const auto dirs = DiscoverContainers(data);
      if (dirs.empty()) {
        err << "no trajectory containers under " << data << "\n";
        return 1;
      }
      bool ok = true;
      for (const auto& d : dirs) {
        const auto problems = ValidateContainer(d);
        out << (problems.empty() ? "ok       " : "INVALID  ") << d.string() << "\n";
        for (const auto& p : problems) out << "    " << p << "\n";
        ok &= problems.empty();
      }
      return ok ? 0 : 1;
    }

    if (*synth_cmd) {
      AugmentConfig c = synth_config.empty() ? DefaultConfig() : LoadConfig(synth_config);
      const RobotRegistry registry = RobotRegistry::FromConfig(c);
      spec.learned_masks = !no_learned;
      if (offset.size() == 3) spec.workspace_offset = Vec3(offset[0], offset[1], offset[2]);
      const auto dirs = synth::GenerateDataset(synth_out, spec, registry.at(synth_robot), synth_robot);
      out << "wrote " << dirs.size() << " trajectories under " << synth_out << "\n";
      return 0;
    }

    AugmentConfig config = BuildConfig(common);
    const RobotRegistry registry = RobotRegistry::FromConfig(config);

    if (*augment) {
      const JobPlan plan = PlanJobs(data, config, registry);
      for (const auto& i : plan.invalid) err << "invalid container " << i.dir.string() << ": " << i.reason << "\n";
      const fs::path report_dir = config.output_root.empty() ? fs::path(data) : config.output_root;
      const RunReport report = RunBatch(plan, config, registry, report_dir);
      out << RunReportSummary(report);
      return 0;
    }

    if (*tune) {
      const Container c = ReadContainer(data);
      const BaseTuningResult r =
          TuneBase(registry.at(robot), c.trajectory, c.meta.source_base, config.base_tuning, config.ik);
      out << TuningJson(r).dump(2) << "\n";
      return 0;
    }

    if (*fuse) {
      for (const auto& dir : ValidContainers(data, err)) {
        const PreparedTrajectory p = PrepareTrajectory(dir, config, registry, false);
        out << p.container.trajectory.id << ": " << p.final_masks.size() << " masks";
        if (!p.aligned_iou.empty()) out << ", " << p.flagged_frames << " flagged";
        out << "\n";
      }
      return 0;
    }

    if (*sim) {
      for (const auto& dir : ValidContainers(data, err)) {
        const Container c = ReadContainer(dir);
        const RobotModel& source = registry.at(c.meta.robot);
        const ReplayResult q = ReplayTrajectory(source, c.meta.source_base, c.trajectory, config.ik);
        std::vector<BinaryMask> masks;
        for (std::size_t t = 0; t < c.meta.frame_count; ++t) {
          const auto fingers = source.gripper ? MapGripper(c.trajectory.gripper_fractions[t], *source.gripper)
                                              : std::vector<double>{};
          masks.push_back(RasterizeRobot(source, q.joint_configs[t], c.meta.source_base, c.meta.camera, fingers).mask);
        }
        WriteMaskSequence(OutputDir(config, c.trajectory.id, c.dir) / "masks_sim", masks);
        out << c.trajectory.id << ": " << masks.size() << " masks, source replay max error "
            << q.max_pos_error_m << " m\n";
      }
      return 0;
    }

    if (*inpaint) {
      for (const auto& dir : ValidContainers(data, err)) {
        const PreparedTrajectory p = PrepareTrajectory(dir, config, registry, true);
        out << p.container.trajectory.id << ": " << p.backgrounds.size() << " backgrounds\n";
        for (const auto& w : p.warnings) err << "  warning: " << w << "\n";
      }
      return 0;
    }

    if (*preview) {
      const PreparedTrajectory p = PrepareTrajectory(data, config, registry, true);
      const Container& c = p.container;
      const RobotModel& target = registry.at(robot);
      const BaseTuningResult tuned =
          TuneBase(target, c.trajectory, c.meta.source_base, config.base_tuning, config.ik);
      out << "base tuning: " << TuningJson(tuned).dump() << "\n";
      if (!tuned.feasible) {
        out << "trajectory is unreachable for " << robot << "; nothing to preview\n";
        return 0;
      }
      const ReplayResult replay = ReplayTrajectory(target, tuned.base_pose, c.trajectory, config.ik);
      fs::create_directories(preview_dir);
      const std::size_t n = c.meta.frame_count;
      const std::size_t k = std::min<std::size_t>(std::size_t(preview_frames), n);
      for (std::size_t i = 0; i < k; ++i) {
        const std::size_t t = k == 1 ? 0 : i * (n - 1) / (k - 1);
        const RenderOutput r = RasterizeRobot(target, replay.joint_configs[t], tuned.base_pose, c.meta.camera,
                                              replay.gripper_configs[t]);
        WritePng(CompositeFrame(p.backgrounds[t], r, config.composite).image,
                 fs::path(preview_dir) / FrameFileName(t));
      }
      out << "wrote " << k << " frames to " << preview_dir << "\n";
      return 0;
    }

    if (*bench) {
      bench_opts.work_dir = bench_dir;
      const BenchReport r = RunBench(bench_opts, config);
      out << BenchReportText(bench_opts, r);
      return r.identical_outputs ? 0 : 1;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace crosspaint
