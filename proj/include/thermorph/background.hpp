#ifndef THERMORPH_BACKGROUND_HPP
#define THERMORPH_BACKGROUND_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string_view>
#include <vector>

#include "thermorph/error.hpp"
#include "thermorph/grid.hpp"
#include "thermorph/morphology.hpp"

namespace thermorph {

/// How the estimator treats pixels on the edge of the processed domain
/// (frame edge or ROI boundary).
///
/// `anchored`: edge pixels keep their value in every marker, so a warm area
/// that touches the domain edge is never shaved as a dome. Enclosed domes
/// lose h per pass until flattened, after which passes stop changing by h
/// and the loop converges.
///
/// `free`: every in-ROI pixel is shifted by h. The highest plateau of the
/// domain is always a regional maximum, so each pass lowers it by exactly h
/// and the stopping rule never fires; the loop always runs to the cap.
enum class BorderPolicy { anchored, free };

constexpr std::string_view to_string(BorderPolicy p) noexcept {
  return p == BorderPolicy::anchored ? "anchored" : "free";
}

struct BackgroundConfig {
  double h = 0.5;  // °C
  int max_iterations = 64;
  StructuringElement se{};
  ReconstructionMethod method = ReconstructionMethod::queue;
  BorderPolicy border = BorderPolicy::anchored;
  bool record_snapshots = false;

  void validate() const {
    if (!(h > 0.0) || !std::isfinite(h)) {
      throw Error(ErrorCode::non_positive_contrast, "h must be a positive finite number");
    }
    if (max_iterations < 1) {
      throw Error(ErrorCode::invalid_argument, "max_iterations must be at least 1");
    }
  }
};

struct BackgroundResult {
  ScalarGrid background;
  int iterations = 0;
  /// Per pass: max over the ROI of (previous - current), in [0, h].
  std::vector<double> max_diffs;
  bool converged = false;
  /// Background after each pass, when requested.
  std::vector<ScalarGrid> snapshots;
};

namespace detail {

/// In-ROI pixels with a structuring-element neighbour that is outside the
/// frame or outside the ROI. A degenerate axis (height 1 signals) has no edge.
inline std::vector<std::uint8_t> domain_edge(const ScalarGrid& grid, const StructuringElement& se) {
  const std::size_t w = grid.width();
  const std::size_t h = grid.height();
  const RoiMask* roi = roi_ptr(grid);
  std::vector<std::uint8_t> edge(grid.size(), 0);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t i = y * w + x;
      if (!grid.in_roi(i)) continue;
      for (const Offset o : se.offsets()) {
        const auto nx = static_cast<std::ptrdiff_t>(x) + o.dx;
        const auto ny = static_cast<std::ptrdiff_t>(y) + o.dy;
        const bool x_out = nx < 0 || nx >= static_cast<std::ptrdiff_t>(w);
        const bool y_out = ny < 0 || ny >= static_cast<std::ptrdiff_t>(h);
        if ((x_out && w > 1) || (y_out && h > 1)) {
          edge[i] = 1;
          break;
        }
        if (x_out || y_out) continue;
        if (roi && !(*roi)[static_cast<std::size_t>(ny) * w + static_cast<std::size_t>(nx)]) {
          edge[i] = 1;
          break;
        }
      }
    }
  }
  return edge;
}

}  // namespace detail

/// Iterative background estimation. Each pass reconstructs the previous
/// background from itself lowered by h; the loop stops as soon as a pass
/// lowers no pixel by the full h, or at the iteration cap.
inline BackgroundResult estimate_background(const ScalarGrid& grid, const BackgroundConfig& cfg = {}) {
  cfg.validate();
  const std::size_t n = grid.size();
  std::vector<std::uint8_t> fixed(n, 0);
  if (cfg.border == BorderPolicy::anchored) fixed = detail::domain_edge(grid, cfg.se);

  BackgroundResult result;
  ScalarGrid previous = grid;
  std::vector<double> marker(n);
  for (int pass = 1; pass <= cfg.max_iterations; ++pass) {
    for (std::size_t i = 0; i < n; ++i) {
      marker[i] = (grid.in_roi(i) && !fixed[i]) ? previous[i] - cfg.h : previous[i];
    }
    ScalarGrid current =
        reconstruct_by_dilation(previous.with_values(marker), previous, cfg.se, cfg.method);

    // A pixel that ended on its marker dropped by exactly h. Comparing against
    // the marker is exact; the subtraction below is not.
    bool full_drop = false;
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!grid.in_roi(i)) continue;
      diff = std::max(diff, previous[i] - current[i]);
      if (!fixed[i] && current[i] == marker[i]) full_drop = true;
    }
    if (full_drop) {
      diff = cfg.h;
    } else if (diff >= cfg.h) {
      diff = std::nextafter(cfg.h, 0.0);
    }
    result.max_diffs.push_back(diff);
    result.iterations = pass;
    if (cfg.record_snapshots) result.snapshots.push_back(current);
    previous = std::move(current);
    if (!full_drop) {
      result.converged = true;
      break;
    }
  }
  result.background = std::move(previous);
  return result;
}

/// grid - background inside the ROI, 0 outside. Rounding noise down to
/// -1e-9 is clamped to 0; anything lower means the background was not
/// produced from this grid.
inline ScalarGrid residual(const ScalarGrid& grid, const BackgroundResult& result) {
  constexpr double kNegativeSlack = 1e-9;
  const auto& bg = result.background;
  if (!grid.same_domain(bg)) {
    throw Error(ErrorCode::dimension_mismatch, "background differs from grid in shape or ROI");
  }
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.in_roi(i)) continue;
    const double r = grid[i] - bg[i];
    if (r < -kNegativeSlack) {
      throw Error(ErrorCode::negative_residual,
                  "background exceeds grid at index " + std::to_string(i));
    }
    out[i] = std::max(r, 0.0);
  }
  return grid.with_values(std::move(out));
}

}  // namespace thermorph

#endif  // THERMORPH_BACKGROUND_HPP
