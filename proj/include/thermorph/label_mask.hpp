#ifndef THERMORPH_LABEL_MASK_HPP
#define THERMORPH_LABEL_MASK_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "thermorph/error.hpp"
#include "thermorph/grid.hpp"

namespace thermorph {

/// Per-pixel class labels in [0, k). Clusterings carry one mean per class,
/// strictly ascending, so label 0 is always the coldest class. Binary masks
/// from thresholding or file I/O have k == 2 and no class means.
/// Pixels outside the ROI carry label 0.
class LabelMask {
 public:
  LabelMask() = default;

  LabelMask(std::size_t width, std::size_t height, std::vector<int> labels, int k,
            std::vector<double> class_means = {}, std::optional<RoiMask> roi = std::nullopt)
      : width_(width),
        height_(height),
        labels_(std::move(labels)),
        k_(k),
        class_means_(std::move(class_means)),
        roi_(std::move(roi)) {
    if (width_ == 0 || height_ == 0 || labels_.size() != width_ * height_) {
      throw Error(ErrorCode::invalid_grid, "label count does not match mask dimensions");
    }
    if (k_ < 1) throw Error(ErrorCode::invalid_argument, "k must be at least 1");
    if (roi_ && roi_->size() != labels_.size()) {
      throw Error(ErrorCode::invalid_grid, "ROI length differs from label count");
    }
    if (!class_means_.empty()) {
      if (class_means_.size() != static_cast<std::size_t>(k_)) {
        throw Error(ErrorCode::invalid_argument, "class_means must have k entries");
      }
      for (std::size_t c = 1; c < class_means_.size(); ++c) {
        if (!(class_means_[c - 1] < class_means_[c])) {
          throw Error(ErrorCode::invalid_argument, "class_means must be strictly ascending");
        }
      }
    }
    if (roi_) {
      for (auto& flag : *roi_) flag = flag ? 1 : 0;
    }
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i] < 0 || labels_[i] >= k_) {
        throw Error(ErrorCode::invalid_argument,
                    "label out of range at index " + std::to_string(i));
      }
      if (roi_ && (*roi_)[i] == 0) labels_[i] = 0;
    }
  }

  static LabelMask binary(std::size_t width, std::size_t height, std::vector<int> labels,
                          std::optional<RoiMask> roi = std::nullopt) {
    return LabelMask(width, height, std::move(labels), 2, {}, std::move(roi));
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return labels_.size(); }
  int k() const noexcept { return k_; }
  bool is_binary() const noexcept { return k_ == 2; }

  const std::vector<int>& labels() const noexcept { return labels_; }
  int operator[](std::size_t i) const noexcept { return labels_[i]; }
  int operator()(std::size_t x, std::size_t y) const noexcept { return labels_[y * width_ + x]; }
  bool foreground(std::size_t i) const noexcept { return labels_[i] != 0; }

  const std::vector<double>& class_means() const noexcept { return class_means_; }

  const std::optional<RoiMask>& roi() const noexcept { return roi_; }
  bool in_roi(std::size_t i) const noexcept { return !roi_ || (*roi_)[i] != 0; }

  std::size_t count(int label) const noexcept {
    std::size_t n = 0;
    for (std::size_t i = 0; i < labels_.size(); ++i) n += (in_roi(i) && labels_[i] == label);
    return n;
  }

  friend bool operator==(const LabelMask&, const LabelMask&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<int> labels_;
  int k_ = 1;
  std::vector<double> class_means_;
  std::optional<RoiMask> roi_;
};

}  // namespace thermorph

#endif  // THERMORPH_LABEL_MASK_HPP
