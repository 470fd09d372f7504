#ifndef THERMORPH_CONFIG_HPP
#define THERMORPH_CONFIG_HPP

// Flat `key = value` text files used for run configs, scene specs and
// reports. '#' starts a comment line; blank lines are ignored. Keys are
// case-sensitive. Unknown keys are rejected so typos fail loudly.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "thermorph/background.hpp"
#include "thermorph/error.hpp"
#include "thermorph/grid.hpp"
#include "thermorph/gridio.hpp"
#include "thermorph/synthgen.hpp"

namespace thermorph {

inline constexpr std::string_view kReportSchema = "thermorph-report/1";

struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

inline std::vector<KeyValue> parse_key_values(std::string_view text, const std::string& name) {
  std::vector<KeyValue> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::config_error, name + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    auto key = detail::trim(line.substr(0, eq));
    auto value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw Error(ErrorCode::config_error, name + ":" + std::to_string(line_no) + ": empty key");
    out.push_back({std::string(key), std::string(value), line_no});
  }
  return out;
}

namespace detail {

inline std::string where(const std::string& name, const KeyValue& kv) {
  return name + ":" + std::to_string(kv.line) + ": " + kv.key;
}

inline double parse_real(const std::string& name, const KeyValue& kv) {
  double v = 0.0;
  const auto* end = kv.value.data() + kv.value.size();
  auto [ptr, ec] = std::from_chars(kv.value.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw Error(ErrorCode::config_error, where(name, kv) + ": expected a finite number, got '" + kv.value + "'");
  }
  return v;
}

template <typename Int>
Int parse_integer(const std::string& name, const KeyValue& kv) {
  Int v{};
  const auto* end = kv.value.data() + kv.value.size();
  auto [ptr, ec] = std::from_chars(kv.value.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw Error(ErrorCode::config_error, where(name, kv) + ": expected an integer, got '" + kv.value + "'");
  }
  return v;
}

inline bool parse_bool(const std::string& name, const KeyValue& kv) {
  if (kv.value == "true" || kv.value == "1" || kv.value == "yes") return true;
  if (kv.value == "false" || kv.value == "0" || kv.value == "no") return false;
  throw Error(ErrorCode::config_error, where(name, kv) + ": expected true or false, got '" + kv.value + "'");
}

inline std::vector<double> parse_list(const std::string& name, const KeyValue& kv, std::size_t expected) {
  std::vector<double> out;
  std::string_view rest = kv.value;
  while (true) {
    const auto comma = rest.find(',');
    KeyValue part{kv.key, std::string(trim(rest.substr(0, comma))), kv.line};
    out.push_back(parse_real(name, part));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  if (out.size() != expected) {
    throw Error(ErrorCode::config_error,
                where(name, kv) + ": expected " + std::to_string(expected) + " comma-separated numbers");
  }
  return out;
}

inline std::optional<RoiRect> parse_roi(const std::string& name, const KeyValue& kv) {
  if (kv.value == "none" || kv.value.empty()) return std::nullopt;
  const auto v = parse_list(name, kv, 4);
  for (double c : v) {
    if (c < 0 || c != std::floor(c)) {
      throw Error(ErrorCode::config_error, where(name, kv) + ": ROI needs non-negative integers x,y,width,height");
    }
  }
  return RoiRect{static_cast<std::size_t>(v[0]), static_cast<std::size_t>(v[1]), static_cast<std::size_t>(v[2]),
                 static_cast<std::size_t>(v[3])};
}

inline std::optional<double> parse_optional_real(const std::string& name, const KeyValue& kv) {
  if (kv.value == "none") return std::nullopt;
  return parse_real(name, kv);
}

inline void reject_duplicates(const std::vector<KeyValue>& kvs, const std::string& name,
                              const std::set<std::string>& repeatable = {}) {
  std::set<std::string> seen;
  for (const auto& kv : kvs) {
    if (repeatable.count(kv.key)) continue;
    if (!seen.insert(kv.key).second) throw Error(ErrorCode::config_error, where(name, kv) + ": duplicate key");
  }
}

inline std::string roi_to_string(const std::optional<RoiRect>& r) {
  if (!r) return "none";
  return std::to_string(r->x) + "," + std::to_string(r->y) + "," + std::to_string(r->width) + "," +
         std::to_string(r->height);
}

}  // namespace detail

/// Scene spec keys: width, height, background_min, background_max,
/// gradient_angle_deg, undulation_amplitude, undulation_period, noise_sigma,
/// seed, roi (x,y,w,h | none), hot_band (°C | none), shadow (°C | none),
/// blob = cx,cy,radius,peak (repeatable; any blob line replaces the default
/// blobs) and blobs = none.
inline SceneSpec parse_scene_spec(std::string_view text, const std::string& name = "<scene>") {
  const auto kvs = parse_key_values(text, name);
  detail::reject_duplicates(kvs, name, {"blob"});
  SceneSpec spec;
  bool custom_blobs = false;
  for (const auto& kv : kvs) {
    const auto& k = kv.key;
    if (k == "width") spec.width = detail::parse_integer<std::size_t>(name, kv);
    else if (k == "height") spec.height = detail::parse_integer<std::size_t>(name, kv);
    else if (k == "background_min") spec.background_min = detail::parse_real(name, kv);
    else if (k == "background_max") spec.background_max = detail::parse_real(name, kv);
    else if (k == "gradient_angle_deg") spec.gradient_angle_deg = detail::parse_real(name, kv);
    else if (k == "undulation_amplitude") spec.undulation_amplitude = detail::parse_real(name, kv);
    else if (k == "undulation_period") spec.undulation_period = detail::parse_real(name, kv);
    else if (k == "noise_sigma") spec.noise_sigma = detail::parse_real(name, kv);
    else if (k == "seed") spec.seed = detail::parse_integer<std::uint64_t>(name, kv);
    else if (k == "roi") spec.roi = detail::parse_roi(name, kv);
    else if (k == "hot_band") spec.hot_band = detail::parse_optional_real(name, kv);
    else if (k == "shadow") spec.shadow = detail::parse_optional_real(name, kv);
    else if (k == "blobs") {
      if (kv.value != "none") throw Error(ErrorCode::config_error, detail::where(name, kv) + ": only 'none' is allowed");
      spec.blobs.clear();
      custom_blobs = true;
    } else if (k == "blob") {
      if (!custom_blobs) spec.blobs.clear();
      custom_blobs = true;
      const auto v = detail::parse_list(name, kv, 4);
      spec.blobs.push_back(Blob{v[0], v[1], v[2], v[3]});
    } else {
      throw Error(ErrorCode::config_error, detail::where(name, kv) + ": unknown key");
    }
  }
  try {
    spec.validate();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::blob_out_of_bounds) throw;
    throw Error(ErrorCode::config_error, name + ": " + e.what());
  }
  return spec;
}

inline std::string format_scene_spec(const SceneSpec& spec) {
  std::ostringstream out;
  out << "width = " << spec.width << "\nheight = " << spec.height << "\n"
      << "background_min = " << detail::format_double(spec.background_min) << "\n"
      << "background_max = " << detail::format_double(spec.background_max) << "\n"
      << "gradient_angle_deg = " << detail::format_double(spec.gradient_angle_deg) << "\n"
      << "undulation_amplitude = " << detail::format_double(spec.undulation_amplitude) << "\n"
      << "undulation_period = " << detail::format_double(spec.undulation_period) << "\n"
      << "noise_sigma = " << detail::format_double(spec.noise_sigma) << "\n"
      << "seed = " << spec.seed << "\n"
      << "roi = " << detail::roi_to_string(spec.roi) << "\n"
      << "hot_band = " << (spec.hot_band ? detail::format_double(*spec.hot_band) : "none") << "\n"
      << "shadow = " << (spec.shadow ? detail::format_double(*spec.shadow) : "none") << "\n";
  if (spec.blobs.empty()) out << "blobs = none\n";
  for (const auto& b : spec.blobs) {
    out << "blob = " << detail::format_double(b.cx) << "," << detail::format_double(b.cy) << ","
        << detail::format_double(b.radius) << "," << detail::format_double(b.peak) << "\n";
  }
  return out.str();
}

enum class Segmentation { threshold, kmeans };
enum class SegmentSource { residual, raw };

/// Everything a CLI run needs; see README for the key list.
struct RunConfig {
  std::optional<std::filesystem::path> input;
  std::optional<GridFormat> input_format;
  std::optional<std::filesystem::path> synth;  // scene spec file, used when no input is given
  std::optional<std::filesystem::path> truth;
  std::optional<RoiRect> roi;
  double h = 0.5;
  int max_iterations = 64;
  Connectivity connectivity = Connectivity::eight;
  ReconstructionMethod method = ReconstructionMethod::queue;
  BorderPolicy border = BorderPolicy::anchored;
  Segmentation segmentation = Segmentation::threshold;
  SegmentSource source = SegmentSource::residual;
  std::optional<double> tau;      // residual default: h
  std::optional<double> raw_tau;  // no default
  int k = 3;
  double kmeans_tol = 1e-6;
  int kmeans_max_iter = 100;
  std::filesystem::path output_dir = "out";
  bool snapshots = false;
  bool render = false;
  bool strict = false;

  BackgroundConfig background() const {
    BackgroundConfig cfg;
    cfg.h = h;
    cfg.max_iterations = max_iterations;
    cfg.se = StructuringElement(connectivity);
    cfg.method = method;
    cfg.border = border;
    cfg.record_snapshots = snapshots;
    return cfg;
  }

  /// Threshold for the selected source; residual grids default to h.
  std::optional<double> effective_tau() const {
    if (source == SegmentSource::raw) return raw_tau ? raw_tau : tau;
    return tau ? tau : std::optional<double>(h);
  }

  void validate() const {
    try {
      background().validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::config_error, e.what());
    }
    if (k < 1) throw Error(ErrorCode::config_error, "k must be at least 1");
    if (kmeans_max_iter < 1) throw Error(ErrorCode::config_error, "kmeans_max_iter must be at least 1");
    if (!(kmeans_tol >= 0)) throw Error(ErrorCode::config_error, "kmeans_tol must be non-negative");
  }
};

inline RunConfig parse_run_config(std::string_view text, const std::string& name = "<config>",
                                  const std::filesystem::path& base_dir = {}) {
  const auto kvs = parse_key_values(text, name);
  detail::reject_duplicates(kvs, name);
  RunConfig cfg;
  auto path_of = [&](const KeyValue& kv) {
    std::filesystem::path p(kv.value);
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };
  for (const auto& kv : kvs) {
    const auto& k = kv.key;
    const auto& v = kv.value;
    auto bad = [&](std::string_view expected) {
      return Error(ErrorCode::config_error,
                   detail::where(name, kv) + ": expected " + std::string(expected) + ", got '" + v + "'");
    };
    if (k == "input") cfg.input = path_of(kv);
    else if (k == "input_format") {
      if (v == "csv") cfg.input_format = GridFormat::csv;
      else if (v == "pfm") cfg.input_format = GridFormat::pfm;
      else throw bad("csv or pfm");
    } else if (k == "synth") cfg.synth = path_of(kv);
    else if (k == "truth") cfg.truth = path_of(kv);
    else if (k == "roi") cfg.roi = detail::parse_roi(name, kv);
    else if (k == "h") cfg.h = detail::parse_real(name, kv);
    else if (k == "max_iterations") cfg.max_iterations = detail::parse_integer<int>(name, kv);
    else if (k == "connectivity") {
      if (v == "4") cfg.connectivity = Connectivity::four;
      else if (v == "8") cfg.connectivity = Connectivity::eight;
      else throw bad("4 or 8");
    } else if (k == "method") {
      if (v == "naive") cfg.method = ReconstructionMethod::naive;
      else if (v == "queue") cfg.method = ReconstructionMethod::queue;
      else throw bad("naive or queue");
    } else if (k == "border") {
      if (v == "anchored") cfg.border = BorderPolicy::anchored;
      else if (v == "free") cfg.border = BorderPolicy::free;
      else throw bad("anchored or free");
    } else if (k == "segmentation") {
      if (v == "threshold") cfg.segmentation = Segmentation::threshold;
      else if (v == "kmeans") cfg.segmentation = Segmentation::kmeans;
      else throw bad("threshold or kmeans");
    } else if (k == "source") {
      if (v == "residual") cfg.source = SegmentSource::residual;
      else if (v == "raw") cfg.source = SegmentSource::raw;
      else throw bad("residual or raw");
    } else if (k == "tau") cfg.tau = detail::parse_real(name, kv);
    else if (k == "raw_tau") cfg.raw_tau = detail::parse_real(name, kv);
    else if (k == "k") cfg.k = detail::parse_integer<int>(name, kv);
    else if (k == "kmeans_tol") cfg.kmeans_tol = detail::parse_real(name, kv);
    else if (k == "kmeans_max_iter") cfg.kmeans_max_iter = detail::parse_integer<int>(name, kv);
    else if (k == "output_dir") cfg.output_dir = path_of(kv);
    else if (k == "snapshots") cfg.snapshots = detail::parse_bool(name, kv);
    else if (k == "render") cfg.render = detail::parse_bool(name, kv);
    else if (k == "strict") cfg.strict = detail::parse_bool(name, kv);
    else throw Error(ErrorCode::config_error, detail::where(name, kv) + ": unknown key");
  }
  cfg.validate();
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = detail::read_file(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::config_error, e.what());
  }
  return parse_run_config(text, path.string(), path.parent_path());
}

/// Ordered key/value report. The first line is always the schema tag.
class Report {
 public:
  Report() { set("schema", std::string(kReportSchema)); }

  void set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries_) {
      if (k == key) {
        v = value;
        return;
      }
    }
    entries_.emplace_back(key, value);
  }
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }
  void set(const std::string& key, std::string_view value) { set(key, std::string(value)); }
  void set(const std::string& key, double value) { set(key, detail::format_double(value)); }
  void set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }
  template <typename Int>
    requires std::is_integral_v<Int>
  void set(const std::string& key, Int value) {
    set(key, std::to_string(value));
  }

  std::optional<std::string> get(const std::string& key) const {
    for (const auto& [k, v] : entries_) {
      if (k == key) return v;
    }
    return std::nullopt;
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }

  std::string str() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
    return out;
  }

  void write(const std::filesystem::path& path) const { detail::write_file_atomic(path, str()); }

  static Report parse(std::string_view text) {
    Report r;
    r.entries_.clear();
    for (auto& kv : parse_key_values(text, "<report>")) r.entries_.emplace_back(kv.key, kv.value);
    return r;
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Records every effective setting under `config.` so a run can be replayed.
inline void record_config(Report& report, const RunConfig& cfg) {
  auto opt_path = [](const std::optional<std::filesystem::path>& p) { return p ? p->string() : std::string("none"); };
  report.set("config.input", opt_path(cfg.input));
  report.set("config.input_format",
             cfg.input_format ? (*cfg.input_format == GridFormat::csv ? "csv" : "pfm") : "auto");
  report.set("config.synth", opt_path(cfg.synth));
  report.set("config.truth", opt_path(cfg.truth));
  report.set("config.roi", detail::roi_to_string(cfg.roi));
  report.set("config.h", cfg.h);
  report.set("config.max_iterations", cfg.max_iterations);
  report.set("config.connectivity", static_cast<int>(cfg.connectivity));
  report.set("config.method", to_string(cfg.method));
  report.set("config.border", to_string(cfg.border));
  report.set("config.segmentation", cfg.segmentation == Segmentation::threshold ? "threshold" : "kmeans");
  report.set("config.source", cfg.source == SegmentSource::residual ? "residual" : "raw");
  const auto tau = cfg.tau ? *cfg.tau : cfg.h;
  report.set("config.tau", tau);
  report.set("config.raw_tau", cfg.raw_tau ? detail::format_double(*cfg.raw_tau) : std::string("none"));
  report.set("config.k", cfg.k);
  report.set("config.kmeans_tol", cfg.kmeans_tol);
  report.set("config.kmeans_max_iter", cfg.kmeans_max_iter);
  report.set("config.output_dir", cfg.output_dir.string());
  report.set("config.snapshots", cfg.snapshots);
  report.set("config.render", cfg.render);
  report.set("config.strict", cfg.strict);
}

}  // namespace thermorph

#endif  // THERMORPH_CONFIG_HPP
