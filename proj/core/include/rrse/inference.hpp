#pragma once

#include <cstddef>
#include <optional>

#include "rrse/network.hpp"

namespace rrse {

/// Channel argmax of [K,H,W] -> [H,W] or [N,K,H,W] -> [N,H,W]; ties pick the
/// lowest class.
LabelMap argmax_channels(const Tensor& logits);

/// Inclusive pixel box.
struct Roi {
  std::size_t top = 0, left = 0, bottom = 0, right = 0;
  bool empty = true;

  std::size_t height() const { return empty ? 0 : bottom - top + 1; }
  std::size_t width() const { return empty ? 0 : right - left + 1; }
  bool contains(std::size_t y, std::size_t x) const {
    return !empty && y >= top && y <= bottom && x >= left && x <= right;
  }
  bool operator==(const Roi&) const = default;
};

/// Bounding box of the nonzero pixels of an [H,W] or [S,H,W] mask (across
/// all slices), grown by `margin` on every side and clipped to the image.
Roi compute_roi(const LabelMap& mask, std::size_t margin = 10);

struct TileOptions {
  /// Requested network input tile; rounded up to the next aligned extent.
  std::size_t input_extent = 128;
  std::size_t max_batch = 8;
};

/// Labels every pixel of `region` in an [C,H,W] image with tiled valid-conv
/// inference. The image is mirror-padded by the network margin and output
/// tiles start on a grid whose period is the total pooling stride, so a
/// pixel's label does not depend on the region or the tile size. The last
/// row/column of tiles may overhang. Pixels outside `region` are 0.
LabelMap predict_labels(Model& model, const Tensor& image, std::optional<Roi> region = std::nullopt,
                        const TileOptions& tiles = {});

struct CascadeResult {
  LabelMap labels;       // same spatial layout as the input
  LabelMap stage1_mask;  // binary
  Roi roi;
};

/// Two-stage segmentation of an [C,H,W] image or [S,C,H,W] slice stack:
/// stage1 (2 classes) finds the tumour, the ROI is its bounding box plus
/// `margin`, and stage2 labels the ROI. Empty stage-1 masks yield all zeros.
CascadeResult cascade_segment(const Tensor& image, Model& stage1, Model& stage2,
                              std::size_t margin = 10, const TileOptions& tiles = {});

}  // namespace rrse
