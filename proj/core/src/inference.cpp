#include "rrse/inference.hpp"

#include <algorithm>

namespace rrse {

LabelMap argmax_channels(const Tensor& logits) {
  if (logits.rank() != 3 && logits.rank() != 4) {
    throw Error("argmax_channels expects [K,H,W] or [N,K,H,W], got " + shape_str(logits.shape()));
  }
  const Dims4 d = as_nchw(logits.shape());
  if (d.c > 256) throw Error("argmax_channels: too many classes for a label map");
  Shape out_shape = logits.rank() == 3 ? Shape{d.h, d.w} : Shape{d.n, d.h, d.w};
  LabelMap out(out_shape);
  for (std::size_t n = 0; n < d.n; ++n) {
    const float* item = logits.data() + n * d.item();
    for (std::size_t i = 0; i < d.plane(); ++i) {
      std::size_t best = 0;
      float best_v = item[i];
      for (std::size_t c = 1; c < d.c; ++c) {
        const float v = item[c * d.plane() + i];
        if (v > best_v) {
          best_v = v;
          best = c;
        }
      }
      out[n * d.plane() + i] = static_cast<std::uint8_t>(best);
    }
  }
  return out;
}

Roi compute_roi(const LabelMap& mask, std::size_t margin) {
  if (mask.rank() != 2 && mask.rank() != 3) {
    throw Error("compute_roi expects [H,W] or [S,H,W], got " + shape_str(mask.shape()));
  }
  const std::size_t H = mask.dim(mask.rank() - 2), W = mask.dim(mask.rank() - 1);
  const std::size_t slices = mask.size() / (H * W);
  Roi roi;
  roi.top = H;
  roi.left = W;
  for (std::size_t s = 0; s < slices; ++s) {
    for (std::size_t y = 0; y < H; ++y) {
      for (std::size_t x = 0; x < W; ++x) {
        if (!mask[(s * H + y) * W + x]) continue;
        roi.empty = false;
        roi.top = std::min(roi.top, y);
        roi.bottom = std::max(roi.bottom, y);
        roi.left = std::min(roi.left, x);
        roi.right = std::max(roi.right, x);
      }
    }
  }
  if (roi.empty) return Roi{};
  roi.top = roi.top > margin ? roi.top - margin : 0;
  roi.left = roi.left > margin ? roi.left - margin : 0;
  roi.bottom = std::min(H - 1, roi.bottom + margin);
  roi.right = std::min(W - 1, roi.right + margin);
  return roi;
}

namespace {

// Mirror index (edge pixel not repeated) into [0, n).
std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<std::ptrdiff_t>(2 * n - 2);
  i %= period;
  if (i < 0) i += period;
  return static_cast<std::size_t>(i < static_cast<std::ptrdiff_t>(n) ? i : period - i);
}

}  // namespace

LabelMap predict_labels(Model& model, const Tensor& image, std::optional<Roi> region,
                        const TileOptions& tiles) {
  if (image.rank() != 3) throw Error("predict_labels expects [C,H,W], got " + shape_str(image.shape()));
  const std::size_t C = image.dim(0), H = image.dim(1), W = image.dim(2);
  if (C != model.spec().input_channels) {
    throw Error("image has " + std::to_string(C) + " channels, network expects " +
                std::to_string(model.spec().input_channels));
  }
  LabelMap out({H, W}, 0);
  const Roi roi = region ? *region : Roi{0, 0, H - 1, W - 1, false};
  if (roi.empty) return out;
  if (roi.bottom >= H || roi.right >= W) throw Error("ROI exceeds image bounds");

  // Max-pooling makes the network equivariant only to shifts by the total
  // pooling stride, so tile origins sit on a global grid of that period and
  // every pixel gets the same prediction whatever the ROI or tile size.
  const std::size_t period = std::size_t{1} << (model.spec().num_scales - 1);
  std::size_t in = model.aligned_input_extent(tiles.input_extent);
  while (model.output_extent(in) < period) in = model.aligned_input_extent(in + 1);
  const std::size_t o = model.output_extent(in);
  const std::size_t m = (in - o) / 2;
  const std::size_t step = o - o % period;
  const std::size_t oy = roi.top - roi.top % period, ox = roi.left - roi.left % period;
  const std::size_t rows = (roi.bottom + 1 - oy + step - 1) / step;
  const std::size_t cols = (roi.right + 1 - ox + step - 1) / step;

  struct Tile {
    std::size_t y0, x0;  // output origin in image coordinates
  };
  std::vector<Tile> all;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) all.push_back({oy + r * step, ox + c * step});
  }
  const std::size_t batch = std::max<std::size_t>(1, tiles.max_batch);
  for (std::size_t start = 0; start < all.size(); start += batch) {
    const std::size_t n = std::min(batch, all.size() - start);
    Tensor input({n, C, in, in});
    for (std::size_t t = 0; t < n; ++t) {
      const Tile& tile = all[start + t];
      for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t y = 0; y < in; ++y) {
          const std::size_t sy = reflect(static_cast<std::ptrdiff_t>(tile.y0 + y) -
                                             static_cast<std::ptrdiff_t>(m), H);
          float* dst = &input.at(t, c, y, 0);
          for (std::size_t x = 0; x < in; ++x) {
            const std::size_t sx = reflect(static_cast<std::ptrdiff_t>(tile.x0 + x) -
                                               static_cast<std::ptrdiff_t>(m), W);
            dst[x] = image.at(c, sy, sx);
          }
        }
      }
    }
    const LabelMap labels = argmax_channels(model.predict(input));
    for (std::size_t t = 0; t < n; ++t) {
      const Tile& tile = all[start + t];
      for (std::size_t y = 0; y < o && tile.y0 + y <= roi.bottom; ++y) {
        for (std::size_t x = 0; x < o && tile.x0 + x <= roi.right; ++x) {
          if (!roi.contains(tile.y0 + y, tile.x0 + x)) continue;
          out.at(tile.y0 + y, tile.x0 + x) = labels[(t * o + y) * o + x];
        }
      }
    }
  }
  return out;
}

CascadeResult cascade_segment(const Tensor& image, Model& stage1, Model& stage2, std::size_t margin,
                              const TileOptions& tiles) {
  if (image.rank() != 3 && image.rank() != 4) {
    throw Error("cascade_segment expects [C,H,W] or [S,C,H,W], got " + shape_str(image.shape()));
  }
  if (stage1.spec().num_classes != 2) throw Error("cascade stage 1 must be a binary network");
  const Dims4 d = as_nchw(image.shape());
  for (const Model* m : {&stage1, &stage2}) {
    if (m->spec().input_channels != d.c) {
      throw Error("image has " + std::to_string(d.c) + " channels, network expects " +
                  std::to_string(m->spec().input_channels));
    }
  }
  const Shape label_shape = image.rank() == 3 ? Shape{d.h, d.w} : Shape{d.n, d.h, d.w};
  auto slice = [&](std::size_t s) {
    return Tensor({d.c, d.h, d.w}, std::vector<float>(image.data() + s * d.item(),
                                                       image.data() + (s + 1) * d.item()));
  };

  CascadeResult result;
  result.stage1_mask = LabelMap(label_shape, 0);
  for (std::size_t s = 0; s < d.n; ++s) {
    const LabelMap m = predict_labels(stage1, slice(s), std::nullopt, tiles);
    std::copy(m.data(), m.data() + m.size(), result.stage1_mask.data() + s * d.plane());
  }
  result.roi = compute_roi(result.stage1_mask, margin);
  result.labels = LabelMap(label_shape, 0);
  if (result.roi.empty) return result;
  for (std::size_t s = 0; s < d.n; ++s) {
    const LabelMap m = predict_labels(stage2, slice(s), result.roi, tiles);
    std::copy(m.data(), m.data() + m.size(), result.labels.data() + s * d.plane());
  }
  return result;
}

}  // namespace rrse
