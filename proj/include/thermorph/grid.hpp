#ifndef THERMORPH_GRID_HPP
#define THERMORPH_GRID_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "thermorph/error.hpp"

namespace thermorph {

/// Per-pixel region-of-interest flags, row-major. Nonzero means "inside".
using RoiMask = std::vector<std::uint8_t>;

/// Axis-aligned rectangle in pixel coordinates, [x, x+width) × [y, y+height).
struct RoiRect {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t width = 0;
  std::size_t height = 0;

  bool contains(std::size_t px, std::size_t py) const noexcept {
    return px >= x && px < x + width && py >= y && py < y + height;
  }
  friend bool operator==(const RoiRect&, const RoiRect&) = default;
};

inline RoiMask make_roi(std::size_t width, std::size_t height, const RoiRect& rect) {
  if (rect.width == 0 || rect.height == 0 || rect.x + rect.width > width ||
      rect.y + rect.height > height) {
    throw Error(ErrorCode::invalid_argument, "ROI rectangle is empty or exceeds the frame");
  }
  RoiMask roi(width * height, 0);
  for (std::size_t y = rect.y; y < rect.y + rect.height; ++y) {
    for (std::size_t x = rect.x; x < rect.x + rect.width; ++x) roi[y * width + x] = 1;
  }
  return roi;
}

/// A 2-D row-major field of finite doubles with an optional ROI.
/// 1-D signals use height == 1.
class ScalarGrid {
 public:
  ScalarGrid() = default;

  ScalarGrid(std::size_t width, std::size_t height, std::vector<double> values,
             std::optional<RoiMask> roi = std::nullopt)
      : width_(width), height_(height), values_(std::move(values)), roi_(std::move(roi)) {
    if (width_ == 0 || height_ == 0) {
      throw Error(ErrorCode::invalid_grid, "grid dimensions must be positive");
    }
    if (values_.size() != width_ * height_) {
      throw Error(ErrorCode::invalid_grid,
                  "expected " + std::to_string(width_ * height_) + " values, got " +
                      std::to_string(values_.size()));
    }
    if (roi_ && roi_->size() != values_.size()) {
      throw Error(ErrorCode::invalid_grid, "ROI length differs from value count");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i])) {
        throw Error(ErrorCode::non_finite_value,
                    "non-finite value at index " + std::to_string(i));
      }
    }
    if (roi_) {
      for (auto& flag : *roi_) flag = flag ? 1 : 0;
    }
  }

  static ScalarGrid filled(std::size_t width, std::size_t height, double value,
                           std::optional<RoiMask> roi = std::nullopt) {
    return ScalarGrid(width, height, std::vector<double>(width * height, value), std::move(roi));
  }

  static ScalarGrid signal(std::vector<double> values) {
    const std::size_t n = values.size();
    return ScalarGrid(n, 1, std::move(values));
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double operator()(std::size_t x, std::size_t y) const noexcept { return values_[y * width_ + x]; }

  bool has_roi() const noexcept { return roi_.has_value(); }
  const std::optional<RoiMask>& roi() const noexcept { return roi_; }
  bool in_roi(std::size_t i) const noexcept { return !roi_ || (*roi_)[i] != 0; }

  std::size_t roi_count() const noexcept {
    if (!roi_) return values_.size();
    std::size_t n = 0;
    for (auto flag : *roi_) n += flag;
    return n;
  }

  /// Same dimensions and identical ROI (both absent, or equal flags).
  bool same_domain(const ScalarGrid& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && roi_ == other.roi_;
  }

  /// New grid on the same domain (dimensions and ROI) with different values.
  ScalarGrid with_values(std::vector<double> values) const {
    return ScalarGrid(width_, height_, std::move(values), roi_);
  }

  ScalarGrid with_roi(std::optional<RoiMask> roi) const {
    return ScalarGrid(width_, height_, values_, std::move(roi));
  }

  friend bool operator==(const ScalarGrid&, const ScalarGrid&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> values_;
  std::optional<RoiMask> roi_;
};

enum class Connectivity { four = 4, eight = 8 };

struct Offset {
  int dx;
  int dy;
  friend bool operator==(const Offset&, const Offset&) = default;
};

/// Flat structuring element: the 4- or 8-neighbourhood. The centre pixel is
/// always part of the window but is not listed among the offsets.
class StructuringElement {
 public:
  constexpr StructuringElement() noexcept : StructuringElement(Connectivity::eight) {}
  constexpr explicit StructuringElement(Connectivity c) noexcept : connectivity_(c) {}

  static constexpr StructuringElement four() noexcept { return StructuringElement(Connectivity::four); }
  static constexpr StructuringElement eight() noexcept { return StructuringElement(Connectivity::eight); }

  constexpr Connectivity connectivity() const noexcept { return connectivity_; }

  std::span<const Offset> offsets() const noexcept {
    if (connectivity_ == Connectivity::four) return {kFour.data(), kFour.size()};
    return {kEight.data(), kEight.size()};
  }

  /// Neighbours that precede the centre in raster order.
  std::span<const Offset> causal_offsets() const noexcept {
    if (connectivity_ == Connectivity::four) return {kFourCausal.data(), kFourCausal.size()};
    return {kEightCausal.data(), kEightCausal.size()};
  }

  /// Neighbours that follow the centre in raster order.
  std::span<const Offset> anticausal_offsets() const noexcept {
    if (connectivity_ == Connectivity::four) return {kFourAnti.data(), kFourAnti.size()};
    return {kEightAnti.data(), kEightAnti.size()};
  }

  friend constexpr bool operator==(StructuringElement a, StructuringElement b) noexcept {
    return a.connectivity_ == b.connectivity_;
  }

 private:
  static constexpr std::array<Offset, 4> kFour{{{0, -1}, {-1, 0}, {1, 0}, {0, 1}}};
  static constexpr std::array<Offset, 8> kEight{
      {{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};
  static constexpr std::array<Offset, 2> kFourCausal{{{0, -1}, {-1, 0}}};
  static constexpr std::array<Offset, 2> kFourAnti{{{0, 1}, {1, 0}}};
  static constexpr std::array<Offset, 4> kEightCausal{{{-1, -1}, {0, -1}, {1, -1}, {-1, 0}}};
  static constexpr std::array<Offset, 4> kEightAnti{{{1, 1}, {0, 1}, {-1, 1}, {1, 0}}};

  Connectivity connectivity_;
};

namespace detail {

/// Calls fn(neighbour_index) for every in-bounds, in-ROI neighbour of (x, y).
template <typename Fn>
inline void for_each_neighbor(std::size_t width, std::size_t height, const RoiMask* roi,
                              std::span<const Offset> offsets, std::size_t x, std::size_t y,
                              Fn&& fn) {
  for (const Offset o : offsets) {
    const auto nx = static_cast<std::ptrdiff_t>(x) + o.dx;
    const auto ny = static_cast<std::ptrdiff_t>(y) + o.dy;
    if (nx < 0 || ny < 0 || nx >= static_cast<std::ptrdiff_t>(width) ||
        ny >= static_cast<std::ptrdiff_t>(height)) {
      continue;
    }
    const std::size_t j = static_cast<std::size_t>(ny) * width + static_cast<std::size_t>(nx);
    if (roi && (*roi)[j] == 0) continue;
    fn(j);
  }
}

inline const RoiMask* roi_ptr(const ScalarGrid& g) noexcept {
  return g.roi() ? &*g.roi() : nullptr;
}

}  // namespace detail

}  // namespace thermorph

#endif  // THERMORPH_GRID_HPP
