#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace thermorph::cli {

namespace fs = std::filesystem;

int exit_code_for(const Error& e) noexcept { return is_config_error(e.code()) ? kConfigError : kDataError; }

RunConfig load_config(const fs::path& path, const std::vector<std::string>& overrides) {
  std::string text;
  std::string name = "<overrides>";
  fs::path base;
  if (!path.empty()) {
    try {
      text = detail::read_file(path);
    } catch (const Error& e) {
      throw Error(ErrorCode::config_error, e.what());
    }
    name = path.string();
    base = path.parent_path();
  }
  if (overrides.empty()) return parse_run_config(text, name, base);

  // Overridden keys are dropped from the file so they do not count as duplicates.
  std::vector<KeyValue> extra;
  for (const auto& o : overrides) {
    auto kv = parse_key_values(o, "--set");
    if (kv.size() != 1) throw Error(ErrorCode::config_error, "--set expects key=value, got '" + o + "'");
    extra.push_back(kv.front());
  }
  std::string merged;
  for (const auto& kv : parse_key_values(text, name)) {
    const bool replaced =
        std::any_of(extra.begin(), extra.end(), [&](const KeyValue& e) { return e.key == kv.key; });
    if (!replaced) merged += kv.key + " = " + kv.value + "\n";
  }
  for (const auto& kv : extra) merged += kv.key + " = " + kv.value + "\n";
  return parse_run_config(merged, name, base);
}

namespace {

struct Input {
  ScalarGrid grid;
  std::optional<LabelMask> truth;
  std::string origin;
};

LabelMask with_roi(const LabelMask& m, const std::optional<RoiMask>& roi) {
  return LabelMask(m.width(), m.height(), m.labels(), m.k(), m.class_means(), roi);
}

Input load_input(const RunConfig& cfg) {
  std::optional<ScalarGrid> grid;
  std::optional<LabelMask> truth;
  std::string origin;
  if (cfg.input) {
    grid = cfg.input_format ? read_grid(*cfg.input, *cfg.input_format) : read_grid(*cfg.input);
    origin = "input";
  } else if (cfg.synth) {
    std::string text;
    try {
      text = detail::read_file(*cfg.synth);
    } catch (const Error& e) {
      throw Error(ErrorCode::config_error, e.what());
    }
    auto scene = gen_scene(parse_scene_spec(text, cfg.synth->string()));
    grid = std::move(scene.grid);
    truth = std::move(scene.truth);
    origin = "synth";
  } else {
    throw Error(ErrorCode::config_error, "config needs 'input' or 'synth'");
  }
  if (cfg.roi) {
    try {
      grid = grid->with_roi(make_roi(grid->width(), grid->height(), *cfg.roi));
    } catch (const Error& e) {
      throw Error(ErrorCode::config_error, std::string("roi: ") + e.what());
    }
  }
  if (cfg.truth) truth = read_mask(*cfg.truth);
  if (truth) {
    if (truth->width() != grid->width() || truth->height() != grid->height()) {
      throw Error(ErrorCode::dimension_mismatch, "truth mask size differs from the grid");
    }
    truth = with_roi(*truth, grid->roi());
  }
  return Input{std::move(*grid), std::move(truth), origin};
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create " + dir.string() + ": " + ec.message());
}

std::string trace_text(const BackgroundResult& r) {
  std::string out;
  for (std::size_t n = 0; n < r.max_diffs.size(); ++n) {
    out += std::to_string(n + 1) + " " + detail::format_double(r.max_diffs[n]) + "\n";
  }
  return out;
}

struct BackgroundRun {
  BackgroundResult result;
  ScalarGrid residual;
};

BackgroundRun run_background(const RunConfig& cfg, const ScalarGrid& grid, Report& report) {
  auto result = estimate_background(grid, cfg.background());
  auto res = residual(grid, result);
  report.set("background.iterations", result.iterations);
  report.set("background.converged", result.converged);
  for (std::size_t n = 0; n < result.max_diffs.size(); ++n) {
    report.set("background.d." + std::to_string(n + 1), result.max_diffs[n]);
  }
  double peak = 0.0;
  for (double v : res.values()) peak = std::max(peak, v);
  report.set("residual.max", peak);
  return {std::move(result), std::move(res)};
}

void write_background_outputs(const RunConfig& cfg, const ScalarGrid& grid, const BackgroundRun& run) {
  write_grid(run.result.background, cfg.output_dir / "background.csv");
  write_grid(run.residual, cfg.output_dir / "residual.csv");
  detail::write_file_atomic(cfg.output_dir / "trace.txt", trace_text(run.result));
  if (cfg.render) {
    render(grid, {}, cfg.output_dir / "raw.ppm");
    render(run.result.background, {}, cfg.output_dir / "background.ppm");
    render(run.residual, {}, cfg.output_dir / "residual.ppm");
  }
  if (cfg.snapshots) {
    // Shared range so the passes are comparable frame to frame.
    RenderSpec spec;
    double lo = 0.0;
    double hi = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!grid.in_roi(i)) continue;
      lo = any ? std::min(lo, grid[i]) : grid[i];
      hi = any ? std::max(hi, grid[i]) : grid[i];
      any = true;
    }
    if (lo < hi) {
      spec.min = lo;
      spec.max = hi;
    }
    for (std::size_t n = 0; n < run.result.snapshots.size(); ++n) {
      char name[32];
      std::snprintf(name, sizeof name, "snapshot_%03zu.ppm", n + 1);
      render(run.result.snapshots[n], spec, cfg.output_dir / name);
    }
  }
}

void record_detection(Report& report, const std::string& prefix, const DetectionReport& r) {
  report.set(prefix + ".tp", r.true_positives);
  report.set(prefix + ".fp", r.false_positives);
  report.set(prefix + ".fn", r.false_negatives);
  report.set(prefix + ".tn", r.true_negatives);
  report.set(prefix + ".precision", r.precision);
  report.set(prefix + ".recall", r.recall);
  report.set(prefix + ".f1", r.f1);
  report.set(prefix + ".iou", r.iou);
  report.set(prefix + ".degenerate", r.degenerate);
}

/// Hottest class as a binary defect mask.
LabelMask top_class(const LabelMask& m) {
  std::vector<int> fg(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) fg[i] = m[i] == m.k() - 1 ? 1 : 0;
  return LabelMask::binary(m.width(), m.height(), std::move(fg), m.roi());
}

struct Segmented {
  LabelMask labels;
  LabelMask defect;
};

Segmented segment_threshold(const ScalarGrid& g, double tau, Report& report, const std::string& prefix) {
  auto mask = threshold_segment(g, tau);
  report.set(prefix + ".tau", tau);
  report.set(prefix + ".foreground", mask.count(1));
  return {mask, mask};
}

Segmented segment_kmeans(const RunConfig& cfg, const ScalarGrid& g, Report& report, const std::string& prefix) {
  auto fit = kmeans_fit(g, KMeansOptions{cfg.k, cfg.kmeans_tol, cfg.kmeans_max_iter});
  report.set(prefix + ".k", cfg.k);
  report.set(prefix + ".iterations", fit.iterations);
  report.set(prefix + ".converged", fit.converged);
  report.set(prefix + ".reseeds", fit.reseeds);
  for (std::size_t c = 0; c < fit.mask.class_means().size(); ++c) {
    report.set(prefix + ".mean." + std::to_string(c), fit.mask.class_means()[c]);
    report.set(prefix + ".count." + std::to_string(c), fit.mask.count(static_cast<int>(c)));
  }
  auto defect = top_class(fit.mask);
  report.set(prefix + ".foreground", defect.count(1));
  return {std::move(fit.mask), std::move(defect)};
}

void record_regions(Report& report, const std::string& prefix, const LabelMask& defect, const RunConfig& cfg) {
  const auto regions = connected_components(defect, StructuringElement(cfg.connectivity));
  report.set(prefix + ".regions", regions.size());
  for (const auto& r : regions) {
    const std::string p = prefix + ".region." + std::to_string(r.id);
    report.set(p + ".area", r.area);
    report.set(p + ".bbox", std::to_string(r.bbox.x0) + "," + std::to_string(r.bbox.y0) + "," +
                                std::to_string(r.bbox.x1) + "," + std::to_string(r.bbox.y1));
    report.set(p + ".centroid", detail::format_double(r.centroid_x) + "," + detail::format_double(r.centroid_y));
  }
}

int finish(const RunConfig& cfg, const Report& report, const BackgroundResult* bg, std::ostream& out) {
  report.write(cfg.output_dir / "report.txt");
  out << "report written to " << (cfg.output_dir / "report.txt").string() << "\n";
  if (bg && !bg->converged) {
    out << "background did not converge within " << bg->iterations << " iterations\n";
    if (cfg.strict) return kNotConverged;
  }
  return kOk;
}

}  // namespace

int cmd_synth(const fs::path& spec_file, const fs::path& out_dir, std::ostream& out) {
  std::string text;
  try {
    text = detail::read_file(spec_file);
  } catch (const Error& e) {
    throw Error(ErrorCode::config_error, e.what());
  }
  const auto spec = parse_scene_spec(text, spec_file.string());
  const auto scene = gen_scene(spec);
  ensure_dir(out_dir);
  write_grid(scene.grid, out_dir / "scene.csv");
  write_grid(scene.clean_background, out_dir / "clean_background.csv");
  write_mask(scene.truth, out_dir / "truth.pgm");
  detail::write_file_atomic(out_dir / "scene.spec", format_scene_spec(spec));

  Report report;
  report.set("command", "synth");
  report.set("width", spec.width);
  report.set("height", spec.height);
  report.set("seed", spec.seed);
  report.set("blobs", spec.blobs.size());
  report.set("truth.foreground", scene.truth.count(1));
  for (const auto& kv : parse_key_values(format_scene_spec(spec), "<spec>")) report.set("spec." + kv.key, kv.value);
  report.write(out_dir / "report.txt");
  out << "wrote scene.csv, clean_background.csv, truth.pgm to " << out_dir.string() << "\n";
  return kOk;
}

int cmd_background(const RunConfig& cfg, std::ostream& out) {
  const auto in = load_input(cfg);
  ensure_dir(cfg.output_dir);
  Report report;
  report.set("command", "background");
  record_config(report, cfg);
  report.set("input.origin", in.origin);
  const auto run = run_background(cfg, in.grid, report);
  write_background_outputs(cfg, in.grid, run);
  out << trace_text(run.result);
  out << "converged = " << (run.result.converged ? "true" : "false") << "\n";
  return finish(cfg, report, &run.result, out);
}

int cmd_segment(const RunConfig& cfg, std::ostream& out) {
  const auto in = load_input(cfg);
  ensure_dir(cfg.output_dir);
  Report report;
  report.set("command", "segment");
  record_config(report, cfg);
  report.set("input.origin", in.origin);

  std::optional<BackgroundRun> bg;
  const ScalarGrid* source = &in.grid;
  if (cfg.source == SegmentSource::residual) {
    bg = run_background(cfg, in.grid, report);
    source = &bg->residual;
  }

  Segmented seg = [&] {
    if (cfg.segmentation == Segmentation::kmeans) return segment_kmeans(cfg, *source, report, "segment");
    const auto tau = cfg.effective_tau();
    if (!tau) throw Error(ErrorCode::config_error, "threshold on the raw grid needs 'raw_tau'");
    return segment_threshold(*source, *tau, report, "segment");
  }();

  write_mask(seg.defect, cfg.output_dir / "mask.pgm");
  if (seg.labels.k() == 2 || seg.labels.k() == 3) {
    const auto levels = classify_levels(seg.labels);
    for (int l = 0; l < 3; ++l) {
      report.set(std::string("levels.") + std::string(to_string(static_cast<Level>(l))), levels.count(l));
    }
    render_levels(levels, cfg.output_dir / "levels.ppm");
  }
  if (cfg.render) render(*source, {}, cfg.output_dir / "source.ppm");
  record_regions(report, "segment", seg.defect, cfg);
  if (in.truth) record_detection(report, "eval", evaluate(seg.defect, *in.truth));

  out << "foreground pixels = " << seg.defect.count(1) << "\n";
  if (auto iou = report.get("eval.iou")) out << "iou = " << *iou << "\n";
  return finish(cfg, report, bg ? &bg->result : nullptr, out);
}

int cmd_pipeline(const RunConfig& cfg, std::ostream& out) {
  const auto in = load_input(cfg);
  ensure_dir(cfg.output_dir);
  Report report;
  report.set("command", "pipeline");
  record_config(report, cfg);
  report.set("input.origin", in.origin);
  report.set("truth.available", in.truth.has_value());

  const auto bg = run_background(cfg, in.grid, report);
  write_background_outputs(cfg, in.grid, bg);

  struct Branch {
    std::string name;
    std::optional<Segmented> seg;
  };
  std::vector<Branch> branches;

  // Raw threshold: explicit raw_tau, else the best tau against truth, else skipped.
  {
    Branch b{"raw_threshold", std::nullopt};
    if (cfg.raw_tau) {
      report.set("raw_threshold.tau_source", "config");
      b.seg = segment_threshold(in.grid, *cfg.raw_tau, report, b.name);
    } else if (in.truth) {
      const auto sweep = best_threshold(in.grid, *in.truth, 50);
      report.set("raw_threshold.tau_source", "truth_sweep");
      b.seg = segment_threshold(in.grid, sweep.tau, report, b.name);
    } else {
      report.set("raw_threshold.tau_source", "none");
      report.set("raw_threshold.skipped", true);
    }
    branches.push_back(std::move(b));
  }
  branches.push_back({"residual_threshold", segment_threshold(bg.residual, cfg.tau ? *cfg.tau : cfg.h, report,
                                                                "residual_threshold")});
  branches.push_back({"raw_kmeans", segment_kmeans(cfg, in.grid, report, "raw_kmeans")});
  branches.push_back({"residual_kmeans", segment_kmeans(cfg, bg.residual, report, "residual_kmeans")});

  for (const auto& b : branches) {
    if (!b.seg) continue;
    write_mask(b.seg->defect, cfg.output_dir / (b.name + ".pgm"));
    if (b.seg->labels.k() == 2 || b.seg->labels.k() == 3) {
      render_levels(classify_levels(b.seg->labels), cfg.output_dir / (b.name + "_levels.ppm"));
    }
    record_regions(report, b.name, b.seg->defect, cfg);
    if (in.truth) record_detection(report, b.name, evaluate(b.seg->defect, *in.truth));
  }

  out << "background: " << bg.result.iterations << " iterations, converged = "
      << (bg.result.converged ? "true" : "false") << "\n";
  if (in.truth) {
    for (const auto& b : branches) {
      if (auto iou = report.get(b.name + ".iou")) out << b.name << ".iou = " << *iou << "\n";
    }
  }
  return finish(cfg, report, &bg.result, out);
}

int cmd_eval(const fs::path& pred_path, const fs::path& truth_path, const std::optional<RoiRect>& roi,
             const fs::path& report_path, std::ostream& out) {
  auto pred = read_mask(pred_path);
  auto truth = read_mask(truth_path);
  if (pred.width() != truth.width() || pred.height() != truth.height()) {
    throw Error(ErrorCode::dimension_mismatch, "prediction and truth differ in size");
  }
  if (roi) {
    RoiMask m;
    try {
      m = make_roi(pred.width(), pred.height(), *roi);
    } catch (const Error& e) {
      throw Error(ErrorCode::config_error, std::string("roi: ") + e.what());
    }
    pred = with_roi(pred, m);
    truth = with_roi(truth, m);
  }
  const auto r = evaluate(pred, truth);
  Report report;
  report.set("command", "eval");
  report.set("config.pred", pred_path.string());
  report.set("config.truth", truth_path.string());
  report.set("config.roi", detail::roi_to_string(roi));
  record_detection(report, "eval", r);
  if (report_path.has_parent_path()) ensure_dir(report_path.parent_path());
  report.write(report_path);
  for (const auto& [k, v] : report.entries()) {
    if (k.starts_with("eval.")) out << k << " = " << v << "\n";
  }
  return kOk;
}

int cmd_bench(const BenchOptions& opt, std::ostream& out) {
  if (opt.sizes.empty()) throw Error(ErrorCode::config_error, "bench needs at least one size");
  if (opt.repetitions < 1) throw Error(ErrorCode::config_error, "repetitions must be at least 1");
  if (!(opt.h > 0.0)) throw Error(ErrorCode::config_error, "h must be positive");
  using clock = std::chrono::steady_clock;
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  };

  Report report;
  report.set("command", "bench");
  report.set("config.repetitions", opt.repetitions);
  report.set("config.seed", opt.seed);
  report.set("config.h", opt.h);
  out << std::left << std::setw(8) << "size" << std::setw(14) << "naive_ms" << std::setw(14) << "queue_ms"
      << std::setw(10) << "speedup"
      << "agree\n";
  for (const auto size : opt.sizes) {
    if (size == 0) throw Error(ErrorCode::config_error, "bench sizes must be positive");
    std::vector<double> naive_ms;
    std::vector<double> queue_ms;
    bool agree = true;
    for (int rep = 0; rep < opt.repetitions; ++rep) {
      const auto mask = smooth_noise_grid(size, size, opt.seed + static_cast<std::uint64_t>(rep));
      std::vector<double> m(mask.size());
      for (std::size_t i = 0; i < m.size(); ++i) m[i] = mask[i] - opt.h;
      const auto marker = mask.with_values(std::move(m));

      auto t0 = clock::now();
      const auto a = reconstruct_by_dilation(marker, mask, {}, ReconstructionMethod::naive);
      auto t1 = clock::now();
      const auto b = reconstruct_by_dilation(marker, mask, {}, ReconstructionMethod::queue);
      auto t2 = clock::now();
      naive_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
      queue_ms.push_back(std::chrono::duration<double, std::milli>(t2 - t1).count());
      agree = agree && a == b;
    }
    const double n = median(naive_ms);
    const double q = median(queue_ms);
    const double speedup = q > 0.0 ? n / q : 0.0;
    std::ostringstream row;
    row << std::left << std::fixed << std::setprecision(3) << std::setw(8) << size << std::setw(14) << n
        << std::setw(14) << q << std::setprecision(2) << std::setw(10) << speedup << (agree ? "yes" : "no");
    out << row.str() << "\n";
    const std::string p = "bench." + std::to_string(size);
    report.set(p + ".naive_ms", n);
    report.set(p + ".queue_ms", q);
    report.set(p + ".speedup", speedup);
    report.set(p + ".agree", agree);
  }
  if (opt.report) {
    if (opt.report->has_parent_path()) ensure_dir(opt.report->parent_path());
    report.write(*opt.report);
  }
  return kOk;
}

}  // namespace thermorph::cli
