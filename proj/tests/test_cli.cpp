#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

#include "crosspaint/cli.hpp"
#include "crosspaint/container.hpp"
#include "dataset_fixtures.hpp"
#include "planar_fixtures.hpp"

using namespace crosspaint;
using namespace crosspaint::testing;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out, err;
};

CliResult Run(std::vector<std::string> args) {
  args.insert(args.begin(), "crosspaint");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = RunCli(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("validate the shipped example") {
  const auto r = Run({"validate", "-d", CROSSPAINT_EXAMPLE_DIR});
  CHECK(r.code == 0);
  CHECK(r.out.find("clip_000") != std::string::npos);
}

TEST_CASE("validate reports a broken container") {
  TempDir dir("cli_validate");
  const auto dirs = MakeDataset(dir.path(), SmallSpec(2, 2));
  fs::remove(dirs[1] / "frames" / FrameFileName(1));
  const auto r = Run({"validate", "-d", dir.path().string()});
  CHECK(r.code == 1);
  CHECK(r.out.find("INVALID") != std::string::npos);
  TempDir empty("cli_empty");
  CHECK(Run({"validate", "-d", empty.path().string()}).code == 1);
}

TEST_CASE("usage errors print help") {
  const auto r = Run({"augment"});
  CHECK(r.code == 2);
  CHECK(r.err.find("--data") != std::string::npos);
  CHECK(Run({"frobnicate"}).code == 2);
  CHECK(Run({"--help"}).code == 0);
}

TEST_CASE("augment with an unknown robot fails before any work") {
  TempDir dir("cli_unknown");
  MakeDataset(dir.path(), SmallSpec(1, 2));
  const auto r = Run({"augment", "-d", dir.path().string(), "-t", "arm6b,arm99"});
  CHECK(r.code != 0);
  CHECK(r.err.find("arm99") != std::string::npos);
  CHECK_FALSE(fs::exists(dir.path() / "clip_000" / "masks_fused"));
}

TEST_CASE("augment with an output root and overrides") {
  TempDir dir("cli_augment");
  MakeDataset(dir.path(), SmallSpec(1, 3));
  const fs::path out = dir.path() / "out";
  const auto r = Run({"augment", "-d", dir.path().string(), "-o", out.string(), "-t", "arm6c", "-j", "2",
                      "--set", "inpaint.fill_iterations=200"});
  CHECK(r.code == 0);
  CHECK(fs::exists(out / "clip_000" / "aug" / "arm6c" / "replay.json"));
  CHECK(fs::exists(out / "run_report.json"));
  const auto bad = Run({"augment", "-d", dir.path().string(), "--set", "fusion.nope=1"});
  CHECK(bad.code == 2);
}

TEST_CASE("tune-base recovers a shifted planar workspace") {
  TempDir dir("cli_tune");
  const fs::path clip = dir.path() / "arc";
  Trajectory traj = synth::Translated(StretchedArc(25), {0.15, 0, 0});
  ContainerMeta meta;
  meta.robot = "planar2";
  meta.camera.width = 16;
  meta.camera.height = 12;
  meta.camera.cx = 8;
  meta.camera.cy = 6;
  meta.frame_count = traj.horizon();
  WriteContainerMetadata(clip, meta, traj);
  WriteFrameSequence(clip / "frames", std::vector<RgbImage>(traj.horizon(), RgbImage(16, 12)));

  const auto r = Run({"tune-base", "-d", clip.string(), "-r", "planar2"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["feasible"] == true);
  const auto d = j["base_translation_delta"];
  CHECK(std::hypot(d[0].get<double>() - 0.15, d[1].get<double>(), d[2].get<double>()) < 0.0125);
}

TEST_CASE("stage subcommands and preview") {
  TempDir dir("cli_stages");
  MakeDataset(dir.path(), SmallSpec(1, 3));
  const fs::path clip = dir.path() / "clip_000";
  CHECK(Run({"render-sim-masks", "-d", dir.path().string()}).code == 0);
  CHECK(fs::exists(clip / "masks_sim" / FrameFileName(2)));
  CHECK(Run({"fuse-masks", "-d", dir.path().string()}).code == 0);
  CHECK(fs::exists(clip / "masks_fused" / FrameFileName(2)));
  CHECK(Run({"inpaint", "-d", dir.path().string(), "--set", "inpaint.fill_iterations=100"}).code == 0);
  CHECK(fs::exists(clip / "background" / FrameFileName(2)));
  const fs::path pv = dir.path() / "preview";
  CHECK(Run({"preview", "-d", clip.string(), "-r", "arm6b", "-n", "2", "--preview-dir", pv.string()}).code == 0);
  CHECK(fs::exists(pv));
  CHECK(!fs::is_empty(pv));
}

TEST_CASE("tiny bench completes with identical outputs") {
  TempDir dir("cli_bench");
  const auto r = Run({"bench", "--clips", "2", "--frames", "2", "--width", "96", "--height", "72",
                      "--bench-targets", "arm6b", "--worker-counts", "1,2", "--work-dir",
                      (dir.path() / "w").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("identical") != std::string::npos);
}
