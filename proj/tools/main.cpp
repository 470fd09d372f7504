#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

std::optional<thermorph::RoiRect> parse_roi_flag(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto kvs = thermorph::parse_key_values("roi = " + text, "--roi");
  return thermorph::detail::parse_roi("--roi", kvs.front());
}

}  // namespace

int main(int argc, char** argv) {
  using namespace thermorph;
  CLI::App app{"thermorph: morphological background removal and anomaly segmentation for thermal grids"};
  app.require_subcommand(1);

  std::string spec_file;
  std::string synth_out = "out";
  auto* synth = app.add_subcommand("synth", "Generate a synthetic scene, truth mask and clean background");
  synth->add_option("spec", spec_file, "Scene spec file")->required();
  synth->add_option("-o,--output-dir", synth_out, "Output directory");

  std::string config_path;
  std::vector<std::string> overrides;
  auto add_run = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", config_path, "Run config file (key = value)");
    sub->add_option("--set", overrides, "Override a config key (key=value); repeatable");
    return sub;
  };
  auto* background = add_run("background", "Estimate the background; write background, residual and trace");
  auto* segment = add_run("segment", "Threshold or k-means segmentation of the raw or residual grid");
  add_run("pipeline", "Background, residual, four-way segmentation and evaluation");

  std::string pred_path;
  std::string truth_path;
  std::string roi_text;
  std::string eval_report = "eval_report.txt";
  auto* eval = app.add_subcommand("eval", "Compare a predicted mask with a truth mask");
  eval->add_option("--pred", pred_path, "Predicted mask (PGM or PNG)")->required();
  eval->add_option("--truth", truth_path, "Truth mask (PGM or PNG)")->required();
  eval->add_option("--roi", roi_text, "Evaluate inside x,y,width,height only");
  eval->add_option("-o,--report", eval_report, "Report file");

  cli::BenchOptions bench_opt;
  std::string bench_report;
  auto* bench = app.add_subcommand("bench", "Time naive against queue reconstruction");
  bench->add_option("--sizes", bench_opt.sizes, "Square grid sizes")->delimiter(',');
  bench->add_option("--repetitions", bench_opt.repetitions, "Runs per size (median reported)");
  bench->add_option("--seed", bench_opt.seed, "Base seed");
  bench->add_option("--offset", bench_opt.h, "Marker offset (marker = grid - offset)");
  bench->add_option("-o,--report", bench_report, "Report file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kConfigError;
  }

  return cli::guarded(
      [&]() -> int {
        if (*synth) return cli::cmd_synth(spec_file, synth_out, std::cout);
        if (*eval) return cli::cmd_eval(pred_path, truth_path, parse_roi_flag(roi_text), eval_report, std::cout);
        if (*bench) {
          if (!bench_report.empty()) bench_opt.report = bench_report;
          return cli::cmd_bench(bench_opt, std::cout);
        }
        const auto cfg = cli::load_config(config_path, overrides);
        if (*background) return cli::cmd_background(cfg, std::cout);
        if (*segment) return cli::cmd_segment(cfg, std::cout);
        return cli::cmd_pipeline(cfg, std::cout);
      },
      std::cerr);
}
