#ifndef THERMORPH_MORPHOLOGY_HPP
#define THERMORPH_MORPHOLOGY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "thermorph/error.hpp"
#include "thermorph/grid.hpp"
#include "thermorph/label_mask.hpp"

namespace thermorph {

enum class ReconstructionMethod { naive, queue };

constexpr std::string_view to_string(ReconstructionMethod m) noexcept {
  return m == ReconstructionMethod::naive ? "naive" : "queue";
}

/// Slack allowed when a marker sits above its mask; absorbs the rounding of
/// markers built as `mask - h`.
inline constexpr double kMarkerSlack = 1e-12;

namespace detail {

struct MaxOp {
  static double apply(double a, double b) noexcept { return a < b ? b : a; }
};
struct MinOp {
  static double apply(double a, double b) noexcept { return b < a ? b : a; }
};

/// Flat rank filter over the centre plus in-bounds, in-ROI neighbours.
/// Out-of-ROI pixels are copied through.
template <typename Op>
void rank_filter(std::size_t width, std::size_t height, const RoiMask* roi,
                 const StructuringElement& se, std::span<const double> src, std::span<double> dst) {
  const auto offsets = se.offsets();
  if (!roi && width >= 3 && height >= 3) {
    // Interior pixels need no bounds checks.
    std::ptrdiff_t deltas[8];
    std::size_t n = 0;
    for (const Offset o : offsets) {
      deltas[n++] = static_cast<std::ptrdiff_t>(o.dy) * static_cast<std::ptrdiff_t>(width) + o.dx;
    }
    for (std::size_t y = 0; y < height; ++y) {
      const bool edge_row = (y == 0 || y + 1 == height);
      for (std::size_t x = 0; x < width; ++x) {
        const std::size_t i = y * width + x;
        double acc = src[i];
        if (edge_row || x == 0 || x + 1 == width) {
          for_each_neighbor(width, height, nullptr, offsets, x, y,
                            [&](std::size_t j) { acc = Op::apply(acc, src[j]); });
        } else {
          for (std::size_t k = 0; k < n; ++k) {
            acc = Op::apply(acc, src[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + deltas[k])]);
          }
        }
        dst[i] = acc;
      }
    }
    return;
  }
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const std::size_t i = y * width + x;
      double acc = src[i];
      if (!roi || (*roi)[i]) {
        for_each_neighbor(width, height, roi, offsets, x, y,
                          [&](std::size_t j) { acc = Op::apply(acc, src[j]); });
      }
      dst[i] = acc;
    }
  }
}

inline void check_marker_mask(const ScalarGrid& marker, const ScalarGrid& mask) {
  if (!marker.same_domain(mask)) {
    throw Error(ErrorCode::dimension_mismatch, "marker and mask differ in shape or ROI");
  }
  for (std::size_t i = 0; i < marker.size(); ++i) {
    if (mask.in_roi(i) && marker[i] > mask[i] + kMarkerSlack) {
      throw Error(ErrorCode::marker_above_mask,
                  "marker exceeds mask at index " + std::to_string(i));
    }
  }
}

/// Repeats geodesic dilation until two successive iterates are identical.
inline std::vector<double> reconstruct_naive(const ScalarGrid& marker, const ScalarGrid& mask,
                                             const StructuringElement& se) {
  const std::size_t w = mask.width();
  const std::size_t h = mask.height();
  const RoiMask* roi = roi_ptr(mask);
  const auto limit = mask.values();
  std::vector<double> current(marker.values().begin(), marker.values().end());
  std::vector<double> next(current.size());
  for (;;) {
    rank_filter<MaxOp>(w, h, roi, se, current, next);
    bool stable = true;
    for (std::size_t i = 0; i < next.size(); ++i) {
      next[i] = std::min(next[i], limit[i]);
      stable = stable && next[i] == current[i];
    }
    if (stable) return current;
    current.swap(next);
  }
}

/// Hybrid scheme: one raster and one anti-raster sweep, then FIFO propagation
/// from the pixels that can still raise a neighbour.
inline std::vector<double> reconstruct_queue(const ScalarGrid& marker, const ScalarGrid& mask,
                                             const StructuringElement& se) {
  const std::size_t w = mask.width();
  const std::size_t h = mask.height();
  const RoiMask* roi = roi_ptr(mask);
  const auto lim = mask.values();
  std::vector<double> out(marker.values().begin(), marker.values().end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(out[i], lim[i]);

  auto inside = [&](std::size_t i) { return !roi || (*roi)[i]; };

  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t p = y * w + x;
      if (!inside(p)) continue;
      double m = out[p];
      for_each_neighbor(w, h, roi, se.causal_offsets(), x, y,
                        [&](std::size_t q) { m = std::max(m, out[q]); });
      out[p] = std::min(m, lim[p]);
    }
  }

  std::deque<std::size_t> fifo;
  for (std::size_t y = h; y-- > 0;) {
    for (std::size_t x = w; x-- > 0;) {
      const std::size_t p = y * w + x;
      if (!inside(p)) continue;
      double m = out[p];
      for_each_neighbor(w, h, roi, se.anticausal_offsets(), x, y,
                        [&](std::size_t q) { m = std::max(m, out[q]); });
      out[p] = std::min(m, lim[p]);
      bool seed = false;
      for_each_neighbor(w, h, roi, se.anticausal_offsets(), x, y, [&](std::size_t q) {
        seed = seed || (out[q] < out[p] && out[q] < lim[q]);
      });
      if (seed) fifo.push_back(p);
    }
  }

  const auto offsets = se.offsets();
  while (!fifo.empty()) {
    const std::size_t p = fifo.front();
    fifo.pop_front();
    const double vp = out[p];
    for_each_neighbor(w, h, roi, offsets, p % w, p / w, [&](std::size_t q) {
      if (out[q] < vp && out[q] < lim[q]) {
        out[q] = std::min(vp, lim[q]);
        fifo.push_back(q);
      }
    });
  }
  return out;
}

}  // namespace detail

/// Neighbourhood maximum. Neighbourhoods are clipped at the frame and at the
/// ROI boundary; out-of-ROI pixels pass through unchanged.
inline ScalarGrid dilate(const ScalarGrid& grid, const StructuringElement& se = {}) {
  std::vector<double> out(grid.size());
  detail::rank_filter<detail::MaxOp>(grid.width(), grid.height(), detail::roi_ptr(grid), se,
                                     grid.values(), out);
  return grid.with_values(std::move(out));
}

/// Neighbourhood minimum; same domain rules as dilate().
inline ScalarGrid erode(const ScalarGrid& grid, const StructuringElement& se = {}) {
  std::vector<double> out(grid.size());
  detail::rank_filter<detail::MinOp>(grid.width(), grid.height(), detail::roi_ptr(grid), se,
                                     grid.values(), out);
  return grid.with_values(std::move(out));
}

/// One geodesic step: dilate the marker, then clip pointwise by the mask.
inline ScalarGrid geodesic_dilate(const ScalarGrid& marker, const ScalarGrid& mask,
                                  const StructuringElement& se = {}) {
  detail::check_marker_mask(marker, mask);
  std::vector<double> out(marker.size());
  detail::rank_filter<detail::MaxOp>(marker.width(), marker.height(), detail::roi_ptr(mask), se,
                                     marker.values(), out);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(out[i], mask[i]);
  return mask.with_values(std::move(out));
}

/// Reconstruction by dilation of `marker` under `mask`: the fixpoint of
/// geodesic dilation. Both methods return the same grid.
inline ScalarGrid reconstruct_by_dilation(const ScalarGrid& marker, const ScalarGrid& mask,
                                          const StructuringElement& se = {},
                                          ReconstructionMethod method = ReconstructionMethod::queue) {
  detail::check_marker_mask(marker, mask);
  auto values = method == ReconstructionMethod::naive ? detail::reconstruct_naive(marker, mask, se)
                                                      : detail::reconstruct_queue(marker, mask, se);
  return mask.with_values(std::move(values));
}

/// Dome extraction: grid - R_grid(grid - h). Values lie in [0, h]; pixels
/// outside the ROI are 0.
inline ScalarGrid h_dome(const ScalarGrid& grid, double h, const StructuringElement& se = {},
                         ReconstructionMethod method = ReconstructionMethod::queue) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw Error(ErrorCode::non_positive_contrast, "h must be a positive finite number");
  }
  std::vector<double> shifted(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    shifted[i] = grid.in_roi(i) ? grid[i] - h : grid[i];
  }
  const auto rec = reconstruct_by_dilation(grid.with_values(std::move(shifted)), grid, se, method);
  std::vector<double> dome(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    // Clamp only removes the rounding of (g - h) when it is subtracted back.
    if (grid.in_roi(i)) dome[i] = std::clamp(grid[i] - rec[i], 0.0, h);
  }
  return grid.with_values(std::move(dome));
}

/// Binary mask of regional-maximum plateaus: connected equal-valued sets with
/// no strictly higher neighbour. Exact; no contrast parameter is involved.
inline LabelMask regional_maxima(const ScalarGrid& grid, const StructuringElement& se = {}) {
  const std::size_t w = grid.width();
  const std::size_t h = grid.height();
  const RoiMask* roi = detail::roi_ptr(grid);
  // Seed with pixels that see a higher neighbour, then spread across plateaus.
  std::vector<std::uint8_t> lower(grid.size(), 0);
  std::deque<std::size_t> fifo;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t p = y * w + x;
      if (!grid.in_roi(p)) continue;
      detail::for_each_neighbor(w, h, roi, se.offsets(), x, y, [&](std::size_t q) {
        if (!lower[p] && grid[q] > grid[p]) {
          lower[p] = 1;
          fifo.push_back(p);
        }
      });
    }
  }
  while (!fifo.empty()) {
    const std::size_t p = fifo.front();
    fifo.pop_front();
    detail::for_each_neighbor(w, h, roi, se.offsets(), p % w, p / w, [&](std::size_t q) {
      if (!lower[q] && grid[q] == grid[p]) {
        lower[q] = 1;
        fifo.push_back(q);
      }
    });
  }
  std::vector<int> labels(grid.size(), 0);
  for (std::size_t i = 0; i < grid.size(); ++i) labels[i] = (grid.in_roi(i) && !lower[i]) ? 1 : 0;
  return LabelMask::binary(w, h, std::move(labels), grid.roi());
}

}  // namespace thermorph

#endif  // THERMORPH_MORPHOLOGY_HPP
