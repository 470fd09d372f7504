#ifndef THERMORPH_SYNTHGEN_HPP
#define THERMORPH_SYNTHGEN_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "thermorph/error.hpp"
#include "thermorph/grid.hpp"
#include "thermorph/label_mask.hpp"

namespace thermorph {

/// SplitMix64 (Steele, Lea & Flood). 64-bit state, one output per call:
///   state += 0x9E3779B97F4A7C15
///   z = state; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB; return z ^ (z >> 31)
/// Integer-only, so the stream is identical on every platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1): top 53 bits scaled by 2^-53.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next() % span);
  }

  /// Standard normal by Box-Muller, one variate per two uniforms:
  /// sqrt(-2 ln(1 - u1)) * cos(2 pi u2).
  double normal() noexcept {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

/// Warm patch with a Gaussian falloff (sigma = radius / 2) truncated at
/// `radius`, so the patch has a finite footprint.
struct Blob {
  double cx = 0.0;      // px
  double cy = 0.0;      // px
  double radius = 8.0;  // px
  double peak = 1.0;    // °C above the background

  double contribution(double x, double y) const noexcept {
    const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
    if (d2 > radius * radius) return 0.0;
    const double sigma = radius / 2.0;
    return peak * std::exp(-d2 / (2.0 * sigma * sigma));
  }
};

struct SceneSpec {
  std::size_t width = 256;
  std::size_t height = 256;
  /// Linear gradient: background_min at one side of the frame, background_max
  /// at the opposite side, along `gradient_angle_deg` (0 = increasing in x).
  double background_min = 26.0;
  double background_max = 27.5;
  double gradient_angle_deg = 0.0;
  /// amplitude * sin(2 pi x / period) * cos(2 pi y / period)
  double undulation_amplitude = 0.0;
  double undulation_period = 128.0;
  std::vector<Blob> blobs = {
      {70.0, 80.0, 18.0, 4.0},
      {180.0, 70.0, 12.0, 1.5},
      {120.0, 170.0, 24.0, 2.4},
      {200.0, 190.0, 10.0, 1.0},
  };
  double noise_sigma = 0.05;
  std::uint64_t seed = 42;
  std::optional<RoiRect> roi = RoiRect{0, 16, 232, 240};
  /// Painted outside the ROI only: a hot band to the right of the ROI and a
  /// shadow above it.
  std::optional<double> hot_band = 33.0;
  std::optional<double> shadow = 19.0;

  void validate() const {
    if (width == 0 || height == 0) throw Error(ErrorCode::invalid_argument, "scene dimensions must be positive");
    if (!(background_max >= background_min)) {
      throw Error(ErrorCode::invalid_argument, "background_max must not be below background_min");
    }
    if (!(noise_sigma >= 0.0)) throw Error(ErrorCode::invalid_argument, "noise_sigma must be non-negative");
    if (!(undulation_period > 0.0)) throw Error(ErrorCode::invalid_argument, "undulation_period must be positive");
    for (const auto& b : blobs) {
      if (!(b.cx >= 0.0 && b.cy >= 0.0 && b.cx <= static_cast<double>(width - 1) &&
            b.cy <= static_cast<double>(height - 1))) {
        throw Error(ErrorCode::blob_out_of_bounds, "blob centre lies outside the frame");
      }
      if (!(b.radius > 0.0)) throw Error(ErrorCode::invalid_argument, "blob radius must be positive");
      if (!(b.peak >= 0.0)) throw Error(ErrorCode::invalid_argument, "blob contrast must be non-negative");
    }
    if (roi) make_roi(width, height, *roi);
  }
};

/// Blob field above this level counts as defect in the truth mask.
inline constexpr double kTruthContrast = 0.1;

struct Scene {
  ScalarGrid grid;
  LabelMask truth;
  ScalarGrid clean_background;
};

/// f(x) = sin x + 2 cos(2x + 5) + 3 sin 3x, sampled uniformly on [x_min, x_max].
inline double reference_signal(double x) noexcept {
  return std::sin(x) + 2.0 * std::cos(2.0 * x + 5.0) + 3.0 * std::sin(3.0 * x);
}

inline ScalarGrid gen_signal_1d(std::size_t n_samples, double x_min, double x_max) {
  if (n_samples < 2) throw Error(ErrorCode::invalid_argument, "need at least two samples");
  if (!(x_min < x_max)) throw Error(ErrorCode::invalid_argument, "x_min must be below x_max");
  std::vector<double> v(n_samples);
  const double step = (x_max - x_min) / static_cast<double>(n_samples - 1);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double x = i + 1 == n_samples ? x_max : x_min + step * static_cast<double>(i);
    v[i] = reference_signal(x);
  }
  return ScalarGrid::signal(std::move(v));
}

inline Scene gen_scene(const SceneSpec& spec) {
  spec.validate();
  const std::size_t w = spec.width;
  const std::size_t h = spec.height;
  std::optional<RoiMask> roi;
  if (spec.roi) roi = make_roi(w, h, *spec.roi);

  const double angle = spec.gradient_angle_deg * std::numbers::pi / 180.0;
  const double ux = std::cos(angle);
  const double uy = std::sin(angle);
  // Projection range over the frame corners, so t spans exactly [0, 1].
  const double xs[2] = {0.0, static_cast<double>(w - 1)};
  const double ys[2] = {0.0, static_cast<double>(h - 1)};
  double pmin = 0.0;
  double pmax = 0.0;
  bool first = true;
  for (double cx : xs) {
    for (double cy : ys) {
      const double p = cx * ux + cy * uy;
      pmin = first ? p : std::min(pmin, p);
      pmax = first ? p : std::max(pmax, p);
      first = false;
    }
  }
  const double span = spec.background_max - spec.background_min;

  std::vector<double> clean(w * h);
  std::vector<double> field(w * h, 0.0);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double fx = static_cast<double>(x);
      const double fy = static_cast<double>(y);
      const double t = pmax > pmin ? (fx * ux + fy * uy - pmin) / (pmax - pmin) : 0.0;
      double v = spec.background_min + span * t;
      if (spec.undulation_amplitude != 0.0) {
        const double k = 2.0 * std::numbers::pi / spec.undulation_period;
        v += spec.undulation_amplitude * std::sin(k * fx) * std::cos(k * fy);
      }
      const std::size_t i = y * w + x;
      if (spec.roi && !spec.roi->contains(x, y)) {
        if (spec.hot_band && x >= spec.roi->x + spec.roi->width) v = *spec.hot_band;
        else if (spec.shadow && y < spec.roi->y) v = *spec.shadow;
      }
      clean[i] = v;
      double b = 0.0;
      for (const auto& blob : spec.blobs) b += blob.contribution(fx, fy);
      field[i] = b;
    }
  }

  SplitMix64 rng(spec.seed);
  std::vector<double> values(w * h);
  std::vector<int> truth(w * h, 0);
  for (std::size_t i = 0; i < w * h; ++i) {
    const double noise = spec.noise_sigma > 0.0 ? spec.noise_sigma * rng.normal() : 0.0;
    values[i] = clean[i] + field[i] + noise;
    const bool inside = !roi || (*roi)[i];
    truth[i] = (inside && field[i] > kTruthContrast) ? 1 : 0;
  }
  return Scene{ScalarGrid(w, h, std::move(values), roi), LabelMask::binary(w, h, std::move(truth), roi),
               ScalarGrid(w, h, std::move(clean), roi)};
}

/// Knobs for drawing random scenes: a linear gradient at a random angle and
/// non-overlapping blobs that lie fully inside the frame.
struct RandomSceneOptions {
  std::size_t width = 512;
  std::size_t height = 512;
  double background_base = 26.0;
  double gradient_span = 4.0;
  int min_blobs = 3;
  int max_blobs = 8;
  double min_peak = 1.0;
  double max_peak = 3.0;
  double min_radius = 8.0;
  double max_radius = 24.0;
  double noise_sigma = 0.05;
};

inline SceneSpec random_scene_spec(const RandomSceneOptions& opt, std::uint64_t seed) {
  SplitMix64 rng(seed ^ 0xA5A5A5A5DEADBEEFULL);
  SceneSpec spec;
  spec.width = opt.width;
  spec.height = opt.height;
  spec.background_min = opt.background_base;
  spec.background_max = opt.background_base + opt.gradient_span;
  spec.gradient_angle_deg = rng.uniform(0.0, 360.0);
  spec.noise_sigma = opt.noise_sigma;
  spec.seed = seed;
  spec.roi.reset();
  spec.blobs.clear();
  const auto target = static_cast<int>(rng.uniform_int(opt.min_blobs, opt.max_blobs));
  for (int attempt = 0; attempt < 10000 && static_cast<int>(spec.blobs.size()) < target; ++attempt) {
    Blob b;
    b.radius = rng.uniform(opt.min_radius, opt.max_radius);
    b.peak = rng.uniform(opt.min_peak, opt.max_peak);
    const double margin = b.radius + 2.0;
    if (2.0 * margin >= static_cast<double>(std::min(opt.width, opt.height))) continue;
    b.cx = std::round(rng.uniform(margin, static_cast<double>(opt.width - 1) - margin));
    b.cy = std::round(rng.uniform(margin, static_cast<double>(opt.height - 1) - margin));
    const bool clear = std::none_of(spec.blobs.begin(), spec.blobs.end(), [&](const Blob& o) {
      return std::hypot(o.cx - b.cx, o.cy - b.cy) < o.radius + b.radius + 4.0;
    });
    if (clear) spec.blobs.push_back(b);
  }
  return spec;
}

/// Uniform random values in [lo, hi]; whole numbers when `integers` is set.
inline ScalarGrid random_grid(std::size_t width, std::size_t height, double lo, double hi,
                              std::uint64_t seed, bool integers = false) {
  SplitMix64 rng(seed);
  std::vector<double> v(width * height);
  for (auto& x : v) {
    x = integers ? static_cast<double>(rng.uniform_int(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)))
                 : rng.uniform(lo, hi);
  }
  return ScalarGrid(width, height, std::move(v));
}

/// Smooth low-frequency surface (a few seeded sinusoids, about ±2) plus white
/// noise of the given sigma.
inline ScalarGrid smooth_noise_grid(std::size_t width, std::size_t height, std::uint64_t seed,
                                    double noise_sigma = 0.05) {
  SplitMix64 rng(seed);
  struct Wave {
    double kx, ky, phase, amp;
  };
  std::vector<Wave> waves(4);
  for (auto& wv : waves) {
    wv.kx = rng.uniform(0.5, 3.0) * 2.0 * std::numbers::pi / static_cast<double>(width);
    wv.ky = rng.uniform(0.5, 3.0) * 2.0 * std::numbers::pi / static_cast<double>(height);
    wv.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    wv.amp = rng.uniform(0.2, 0.5);
  }
  std::vector<double> v(width * height);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      double s = 27.0;
      for (const auto& wv : waves) {
        s += wv.amp * std::sin(wv.kx * static_cast<double>(x) + wv.ky * static_cast<double>(y) + wv.phase);
      }
      v[y * width + x] = s + noise_sigma * rng.normal();
    }
  }
  return ScalarGrid(width, height, std::move(v));
}

}  // namespace thermorph

#endif  // THERMORPH_SYNTHGEN_HPP
