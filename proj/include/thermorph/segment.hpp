#ifndef THERMORPH_SEGMENT_HPP
#define THERMORPH_SEGMENT_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <string>
#include <string_view>
#include <vector>

#include "thermorph/error.hpp"
#include "thermorph/grid.hpp"
#include "thermorph/label_mask.hpp"

namespace thermorph {

/// Global threshold: label 1 where an in-ROI value exceeds tau.
inline LabelMask threshold_segment(const ScalarGrid& grid, double tau) {
  std::vector<int> labels(grid.size(), 0);
  for (std::size_t i = 0; i < grid.size(); ++i) labels[i] = (grid.in_roi(i) && grid[i] > tau) ? 1 : 0;
  return LabelMask::binary(grid.width(), grid.height(), std::move(labels), grid.roi());
}

struct KMeansOptions {
  int k = 3;
  double tol = 1e-6;  // °C, max centroid movement
  int max_iter = 100;
};

struct KMeansFit {
  LabelMask mask;
  int iterations = 0;
  bool converged = false;
  /// Empty clusters that had to be re-seeded.
  int reseeds = 0;
  /// Within-class sum of squares after each completed Lloyd step.
  std::vector<double> sse_trace;
};

namespace detail {

inline int nearest_centroid(double v, const std::vector<double>& centroids) noexcept {
  int best = 0;
  double best_d = std::abs(v - centroids[0]);
  for (std::size_t c = 1; c < centroids.size(); ++c) {
    const double d = std::abs(v - centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

}  // namespace detail

/// Lloyd's algorithm on the 1-D distribution of in-ROI values.
///
/// Seeds sit at the (i + 0.5)/k quantiles of the sorted values. Ties in the
/// assignment go to the lower centroid. An empty cluster is re-seeded at the
/// value farthest from its current centroid (first such pixel in raster order).
/// Sums run in pixel order, so the result is bit-reproducible.
inline KMeansFit kmeans_fit(const ScalarGrid& grid, const KMeansOptions& opt = {}) {
  if (opt.k < 1) throw Error(ErrorCode::invalid_argument, "k must be at least 1");
  if (opt.max_iter < 1) throw Error(ErrorCode::invalid_argument, "max_iter must be at least 1");
  if (!(opt.tol >= 0.0)) throw Error(ErrorCode::invalid_argument, "tol must be non-negative");

  std::vector<std::size_t> index;
  std::vector<double> values;
  index.reserve(grid.roi_count());
  values.reserve(grid.roi_count());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.in_roi(i)) continue;
    index.push_back(i);
    values.push_back(grid[i]);
  }
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const auto distinct = static_cast<std::size_t>(
      std::unique(sorted.begin(), sorted.end()) - sorted.begin());
  if (distinct < static_cast<std::size_t>(opt.k)) {
    throw Error(ErrorCode::insufficient_distinct_values,
                std::to_string(distinct) + " distinct in-ROI values for k = " + std::to_string(opt.k));
  }
  sorted = values;
  std::sort(sorted.begin(), sorted.end());

  const std::size_t n = values.size();
  const auto k = static_cast<std::size_t>(opt.k);
  std::vector<double> centroids(k);
  for (std::size_t c = 0; c < k; ++c) {
    const auto q = static_cast<std::size_t>((static_cast<double>(c) + 0.5) / static_cast<double>(k) *
                                            static_cast<double>(n));
    centroids[c] = sorted[std::min(q, n - 1)];
  }

  KMeansFit fit;
  std::vector<int> assign(n, 0);
  std::vector<double> sums(k);
  std::vector<std::size_t> counts(k);

  auto assign_all = [&] {
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t j = 0; j < n; ++j) {
      const int c = detail::nearest_centroid(values[j], centroids);
      assign[j] = c;
      sums[static_cast<std::size_t>(c)] += values[j];
      ++counts[static_cast<std::size_t>(c)];
    }
  };

  for (int iter = 1; iter <= opt.max_iter; ++iter) {
    fit.iterations = iter;
    assign_all();

    bool reseeded = false;
    std::vector<std::uint8_t> taken(n, 0);
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (taken[j]) continue;
        const double d = std::abs(values[j] - centroids[static_cast<std::size_t>(assign[j])]);
        if (d > far_d) {
          far_d = d;
          far = j;
        }
      }
      taken[far] = 1;
      centroids[c] = values[far];
      ++fit.reseeds;
      reseeded = true;
    }
    if (reseeded) {
      std::sort(centroids.begin(), centroids.end());
      continue;
    }

    double movement = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      const double mean = sums[c] / static_cast<double>(counts[c]);
      movement = std::max(movement, std::abs(mean - centroids[c]));
      centroids[c] = mean;
    }
    double sse = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = values[j] - centroids[static_cast<std::size_t>(assign[j])];
      sse += d * d;
    }
    fit.sse_trace.push_back(sse);
    if (movement < opt.tol) {
      fit.converged = true;
      break;
    }
  }

  // Final partition under the final centroids; report the partition's own means.
  assign_all();
  std::vector<double> means(k);
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) {
      throw Error(ErrorCode::insufficient_distinct_values, "k-means ended with an empty cluster");
    }
    means[c] = sums[c] / static_cast<double>(counts[c]);
  }
  // Centroids are kept sorted, so the labels are already ordered by mean.
  std::vector<int> labels(grid.size(), 0);
  for (std::size_t j = 0; j < n; ++j) labels[index[j]] = assign[j];
  fit.mask = LabelMask(grid.width(), grid.height(), std::move(labels), opt.k, std::move(means), grid.roi());
  return fit;
}

inline LabelMask kmeans_segment(const ScalarGrid& grid, int k, double tol = 1e-6, int max_iter = 100) {
  return kmeans_fit(grid, KMeansOptions{k, tol, max_iter}).mask;
}

/// Condition levels used in the tri-level view.
enum class Level : int { sound = 0, possible = 1, delaminated = 2 };

constexpr std::string_view to_string(Level l) noexcept {
  switch (l) {
    case Level::sound: return "sound";
    case Level::possible: return "possible";
    case Level::delaminated: return "delaminated";
  }
  return "?";
}

/// Maps a 2- or 3-class mask onto sound / possible / delaminated (k = 3 view).
/// Hotter classes are more suspect; a 2-class mask has no "possible" pixels.
inline LabelMask classify_levels(const LabelMask& mask) {
  if (mask.k() != 2 && mask.k() != 3) {
    throw Error(ErrorCode::unsupported_k, "classify_levels needs k = 2 or 3, got " + std::to_string(mask.k()));
  }
  std::vector<int> levels(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const int label = mask[i];
    Level l = Level::sound;
    if (mask.k() == 3) {
      l = static_cast<Level>(label);
    } else if (label == 1) {
      l = Level::delaminated;
    }
    levels[i] = static_cast<int>(l);
  }
  return LabelMask(mask.width(), mask.height(), std::move(levels), 3, {}, mask.roi());
}

struct BoundingBox {
  std::size_t x0, y0, x1, y1;  // inclusive
};

struct Region {
  int id = 0;  // 1-based, in output order
  std::size_t area = 0;
  BoundingBox bbox{};
  double centroid_x = 0.0;
  double centroid_y = 0.0;
};

/// Maximal connected foreground regions, ordered by (top row, left column)
/// of their bounding boxes.
inline std::vector<Region> connected_components(const LabelMask& mask, const StructuringElement& se = {}) {
  if (!mask.is_binary()) throw Error(ErrorCode::invalid_argument, "connected_components needs a binary mask");
  const std::size_t w = mask.width();
  const std::size_t h = mask.height();
  std::vector<std::uint8_t> seen(mask.size(), 0);
  std::vector<Region> regions;
  std::deque<std::size_t> todo;
  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (seen[start] || !mask.foreground(start)) continue;
    Region r;
    r.bbox = {start % w, start / w, start % w, start / w};
    double sx = 0.0;
    double sy = 0.0;
    seen[start] = 1;
    todo.push_back(start);
    while (!todo.empty()) {
      const std::size_t p = todo.front();
      todo.pop_front();
      const std::size_t x = p % w;
      const std::size_t y = p / w;
      ++r.area;
      sx += static_cast<double>(x);
      sy += static_cast<double>(y);
      r.bbox.x0 = std::min(r.bbox.x0, x);
      r.bbox.x1 = std::max(r.bbox.x1, x);
      r.bbox.y0 = std::min(r.bbox.y0, y);
      r.bbox.y1 = std::max(r.bbox.y1, y);
      detail::for_each_neighbor(w, h, nullptr, se.offsets(), x, y, [&](std::size_t q) {
        if (!seen[q] && mask.foreground(q)) {
          seen[q] = 1;
          todo.push_back(q);
        }
      });
    }
    r.centroid_x = sx / static_cast<double>(r.area);
    r.centroid_y = sy / static_cast<double>(r.area);
    regions.push_back(r);
  }
  std::stable_sort(regions.begin(), regions.end(), [](const Region& a, const Region& b) {
    return a.bbox.y0 != b.bbox.y0 ? a.bbox.y0 < b.bbox.y0 : a.bbox.x0 < b.bbox.x0;
  });
  for (std::size_t i = 0; i < regions.size(); ++i) regions[i].id = static_cast<int>(i + 1);
  return regions;
}

struct DetectionReport {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  std::size_t true_negatives = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double iou = 0.0;
  /// Set when any metric had a zero denominator and was reported as 0.
  bool degenerate = false;
};

/// Pixel-level comparison of two binary masks over the shared ROI.
inline DetectionReport evaluate(const LabelMask& pred, const LabelMask& truth) {
  if (pred.width() != truth.width() || pred.height() != truth.height() || pred.roi() != truth.roi()) {
    throw Error(ErrorCode::dimension_mismatch, "prediction and truth differ in shape or ROI");
  }
  if (!pred.is_binary() || !truth.is_binary()) {
    throw Error(ErrorCode::invalid_argument, "evaluate needs binary masks");
  }
  DetectionReport r;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!pred.in_roi(i)) continue;
    const bool p = pred.foreground(i);
    const bool t = truth.foreground(i);
    if (p && t) ++r.true_positives;
    else if (p) ++r.false_positives;
    else if (t) ++r.false_negatives;
    else ++r.true_negatives;
  }
  auto ratio = [&](std::size_t num, std::size_t den) {
    if (den == 0) {
      r.degenerate = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  const std::size_t tp = r.true_positives;
  r.precision = ratio(tp, tp + r.false_positives);
  r.recall = ratio(tp, tp + r.false_negatives);
  r.f1 = ratio(2 * tp, 2 * tp + r.false_positives + r.false_negatives);
  r.iou = ratio(tp, tp + r.false_positives + r.false_negatives);
  return r;
}

struct ThresholdSweep {
  double tau = 0.0;
  DetectionReport report;
};

/// Best global threshold against a known truth mask: `count` evenly spaced
/// taus from the in-ROI minimum to the maximum (inclusive), keeping the
/// highest IoU; ties keep the lower tau.
inline ThresholdSweep best_threshold(const ScalarGrid& grid, const LabelMask& truth, int count = 50) {
  if (count < 2) throw Error(ErrorCode::invalid_argument, "threshold sweep needs at least two taus");
  double lo = 0.0;
  double hi = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.in_roi(i)) continue;
    lo = any ? std::min(lo, grid[i]) : grid[i];
    hi = any ? std::max(hi, grid[i]) : grid[i];
    any = true;
  }
  ThresholdSweep best;
  for (int j = 0; j < count; ++j) {
    const double tau = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(count - 1);
    const auto r = evaluate(threshold_segment(grid, tau), truth);
    if (j == 0 || r.iou > best.report.iou) best = {tau, r};
  }
  return best;
}

}  // namespace thermorph

#endif  // THERMORPH_SEGMENT_HPP
