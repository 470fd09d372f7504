#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"

namespace thermorph {
namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("thermorph_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  /// Runs the installed binary; returns its exit status.
  int run(const std::string& args) const {
    const std::string cmd = std::string(THERMORPH_BINARY) + " " + args + " > " + (dir_ / "stdout.txt").string() +
                            " 2> " + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string out() const { return detail::read_file(dir_ / "stdout.txt"); }
  std::string err() const { return detail::read_file(dir_ / "stderr.txt"); }

  Report report(const fs::path& p) const { return Report::parse(detail::read_file(p)); }

  fs::path dir_;
};

/// 96x96 flat scene with one tall dome and no ROI.
const char* kDomeSpec =
    "width = 96\nheight = 96\nroi = none\nhot_band = none\nshadow = none\nnoise_sigma = 0\n"
    "blob = 48,48,20,4.5\n";

TEST_F(Cli, SynthWritesSceneFiles) {
  const auto spec = fs::path(THERMORPH_TEST_DATA) / "golden_scene.spec";
  ASSERT_EQ(run("synth " + spec.string() + " -o " + (dir_ / "s").string()), 0) << err();
  for (const char* f : {"scene.csv", "clean_background.csv", "truth.pgm", "scene.spec", "report.txt"}) {
    EXPECT_TRUE(fs::exists(dir_ / "s" / f)) << f;
  }
  const auto grid = read_grid(dir_ / "s" / "scene.csv");
  EXPECT_EQ(grid.width(), 64u);
  EXPECT_EQ(report(dir_ / "s" / "report.txt").get("schema"), "thermorph-report/1");
}

TEST_F(Cli, PipelineOnDefaultSceneReportsFourWayIou) {
  write("scene.spec", "seed = 42\n");
  const auto cfg = write("run.cfg", "synth = scene.spec\noutput_dir = out\nrender = true\n");
  ASSERT_EQ(run("pipeline " + cfg.string()), 0) << err();
  const auto r = report(dir_ / "out" / "report.txt");
  for (const char* b : {"raw_threshold", "residual_threshold", "raw_kmeans", "residual_kmeans"}) {
    const auto iou = r.get(std::string(b) + ".iou");
    ASSERT_TRUE(iou) << b;
    const double v = std::stod(*iou);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_EQ(r.get("raw_threshold.tau_source"), "truth_sweep");
  EXPECT_EQ(r.get("background.converged"), "true");
  EXPECT_GT(std::stod(*r.get("residual_threshold.iou")), std::stod(*r.get("raw_threshold.iou")));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "residual_kmeans_levels.ppm"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "residual.ppm"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "residual.csv"));
  EXPECT_NE(out().find("residual_threshold.iou"), std::string::npos);
}

TEST_F(Cli, RunsAreBitReproducible) {
  write("scene.spec", "width = 80\nheight = 64\nroi = 0,8,72,56\nblob = 30,30,9,2\nblob = 55,45,6,1.5\n");
  const auto cfg = write("run.cfg", "synth = scene.spec\n");
  ASSERT_EQ(run("pipeline " + cfg.string() + " --set output_dir=" + (dir_ / "a").string()), 0) << err();
  ASSERT_EQ(run("pipeline " + cfg.string() + " --set output_dir=" + (dir_ / "b").string()), 0) << err();
  for (const char* f : {"background.csv", "residual.csv", "trace.txt", "residual_kmeans.pgm", "raw_threshold.pgm"}) {
    EXPECT_EQ(detail::read_file(dir_ / "a" / f), detail::read_file(dir_ / "b" / f)) << f;
  }
  auto ra = report(dir_ / "a" / "report.txt");
  auto rb = report(dir_ / "b" / "report.txt");
  ra.set("config.output_dir", "-");
  rb.set("config.output_dir", "-");
  EXPECT_EQ(ra.str(), rb.str());
}

TEST_F(Cli, BackgroundCapIsNotAnErrorUnlessStrict) {
  write("dome.spec", kDomeSpec);
  const auto cfg = write("run.cfg", "synth = dome.spec\nmax_iterations = 1\noutput_dir = out\n");
  ASSERT_EQ(run("background " + cfg.string()), 0) << err();
  const auto r = report(dir_ / "out" / "report.txt");
  EXPECT_EQ(r.get("background.converged"), "false");
  EXPECT_EQ(r.get("background.iterations"), "1");
  EXPECT_EQ(run("background " + cfg.string() + " --set strict=true"), 4);
}

TEST_F(Cli, BackgroundTraceAndSnapshots) {
  write("dome.spec", kDomeSpec);
  const auto cfg = write("run.cfg", "synth = dome.spec\noutput_dir = out\nsnapshots = true\n");
  ASSERT_EQ(run("background " + cfg.string()), 0) << err();
  const auto r = report(dir_ / "out" / "report.txt");
  const int n = std::stoi(*r.get("background.iterations"));
  EXPECT_GE(n, 8);
  EXPECT_LE(n, 11);
  std::istringstream trace(detail::read_file(dir_ / "out" / "trace.txt"));
  int lines = 0;
  int idx = 0;
  double d = 0;
  while (trace >> idx >> d) {
    ++lines;
    EXPECT_EQ(idx, lines);
    EXPECT_LE(d, 0.5);
  }
  EXPECT_EQ(lines, n);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "snapshot_001.ppm"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / ("snapshot_00" + std::to_string(n) + ".ppm")) ||
              fs::exists(dir_ / "out" / ("snapshot_0" + std::to_string(n) + ".ppm")));
}

TEST_F(Cli, SegmentKmeansAndThreshold) {
  write("dome.spec", kDomeSpec);
  const auto cfg = write("run.cfg", "synth = dome.spec\noutput_dir = out\nsegmentation = kmeans\n");
  ASSERT_EQ(run("segment " + cfg.string()), 0) << err();
  auto r = report(dir_ / "out" / "report.txt");
  EXPECT_EQ(r.get("segment.k"), "3");
  EXPECT_TRUE(r.get("levels.delaminated"));
  EXPECT_TRUE(r.get("eval.iou"));
  EXPECT_EQ(r.get("segment.regions"), "1");
  EXPECT_TRUE(fs::exists(dir_ / "out" / "levels.ppm"));

  ASSERT_EQ(run("segment " + cfg.string() + " --set segmentation=threshold"), 0) << err();
  r = report(dir_ / "out" / "report.txt");
  EXPECT_EQ(r.get("segment.tau"), "0.5");
  EXPECT_EQ(r.get("levels.possible"), "0");

  // Raw threshold has no default tau.
  EXPECT_EQ(run("segment " + cfg.string() + " --set segmentation=threshold --set source=raw"), 2);
  EXPECT_EQ(run("segment " + cfg.string() + " --set segmentation=threshold --set source=raw --set raw_tau=27"), 0);
}

TEST_F(Cli, EvalIdenticalMasks) {
  const auto m = LabelMask::binary(4, 2, {0, 1, 1, 0, 1, 0, 0, 1});
  write_mask(m, dir_ / "p.pgm");
  write_mask(m, dir_ / "t.png");
  ASSERT_EQ(run("eval --pred " + (dir_ / "p.pgm").string() + " --truth " + (dir_ / "t.png").string() + " -o " +
                (dir_ / "e.txt").string()),
            0)
      << err();
  EXPECT_EQ(report(dir_ / "e.txt").get("eval.iou"), "1");
  EXPECT_NE(out().find("eval.iou = 1"), std::string::npos);

  ASSERT_EQ(run("eval --pred " + (dir_ / "p.pgm").string() + " --truth " + (dir_ / "t.png").string() +
                " --roi 0,0,2,1 -o " + (dir_ / "e2.txt").string()),
            0);
  EXPECT_EQ(report(dir_ / "e2.txt").get("eval.tp"), "1");
}

TEST_F(Cli, ExitCodes) {
  const auto bad_key = write("bad.cfg", "colour = red\n");
  EXPECT_EQ(run("pipeline " + bad_key.string()), 2);
  EXPECT_NE(err().find("unknown key"), std::string::npos);
  const auto missing = write("missing.cfg", "input = nowhere.csv\n");
  EXPECT_EQ(run("pipeline " + missing.string()), 3);
  write("ragged.csv", "1,2\n3\n");
  const auto ragged = write("ragged.cfg", "input = ragged.csv\n");
  EXPECT_EQ(run("background " + ragged.string()), 3);
  EXPECT_NE(err().find("RaggedRows"), std::string::npos);
  EXPECT_EQ(run("background " + (dir_ / "no_such.cfg").string()), 2);
  EXPECT_EQ(run("pipeline --set h=-1"), 2);
  EXPECT_EQ(run("pipeline --set nonsense"), 2);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("--help"), 0);
  write("far.spec", "blob = 900,10,5,1\n");
  EXPECT_EQ(run("synth " + (dir_ / "far.spec").string() + " -o " + (dir_ / "x").string()), 2);
}

TEST_F(Cli, CsvInputWithRoiOverride) {
  const auto scene = gen_scene(parse_scene_spec(kDomeSpec));
  write_grid(scene.grid, dir_ / "g.csv");
  write_mask(scene.truth, dir_ / "t.pgm");
  const auto cfg = write("run.cfg", "input = g.csv\ntruth = t.pgm\nroi = 4,4,88,88\noutput_dir = out\n");
  ASSERT_EQ(run("pipeline " + cfg.string()), 0) << err();
  const auto r = report(dir_ / "out" / "report.txt");
  EXPECT_EQ(r.get("config.roi"), "4,4,88,88");
  EXPECT_EQ(r.get("input.origin"), "input");
  EXPECT_GT(std::stod(*r.get("residual_threshold.iou")), 0.5);
}

TEST_F(Cli, BenchTable) {
  ASSERT_EQ(run("bench --sizes 16,32 --repetitions 2 -o " + (dir_ / "b.txt").string()), 0) << err();
  EXPECT_NE(out().find("speedup"), std::string::npos);
  const auto r = report(dir_ / "b.txt");
  EXPECT_EQ(r.get("bench.16.agree"), "true");
  EXPECT_EQ(r.get("bench.32.agree"), "true");
  EXPECT_EQ(run("bench --sizes 0"), 2);
}

TEST_F(Cli, InProcessOverrides) {
  const auto cfg_path = write("run.cfg", "h = 0.5\nk = 3\n");
  const auto cfg = cli::load_config(cfg_path, {"h=0.25", "connectivity = 4"});
  EXPECT_EQ(cfg.h, 0.25);
  EXPECT_EQ(cfg.k, 3);
  EXPECT_EQ(cfg.connectivity, Connectivity::four);
  EXPECT_THROW(cli::load_config(cfg_path, {"bogus=1"}), Error);
}

}  // namespace
}  // namespace thermorph
