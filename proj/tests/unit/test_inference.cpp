#include <gtest/gtest.h>

#include <cstdlib>

#include "oracles.hpp"
#include "rrse/inference.hpp"

using namespace rrse;

namespace {

NetworkSpec small_spec(std::size_t classes) {
  NetworkSpec s;
  s.base_channels = 4;
  s.convs_per_scale = 1;
  s.num_scales = 2;
  s.dilation_schedule = {2, 1};
  s.num_classes = classes;
  s.recombination = true;
  s.rr_mode = RRMode::segse;
  return s;
}

// Mirror padding without edge repetition, written independently of the
// library: index -1 maps to 1, index n maps to n-2.
Tensor mirror_pad(const Tensor& img, std::size_t m) {
  const std::size_t C = img.dim(0), H = img.dim(1), W = img.dim(2);
  Tensor out({C, H + 2 * m, W + 2 * m});
  auto fold = [](long i, long n) {
    while (i < 0 || i >= n) i = i < 0 ? -i : 2 * (n - 1) - i;
    return static_cast<std::size_t>(i);
  };
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t y = 0; y < H + 2 * m; ++y)
      for (std::size_t x = 0; x < W + 2 * m; ++x)
        out.at(c, y, x) = img.at(c, fold(long(y) - long(m), long(H)), fold(long(x) - long(m), long(W)));
  return out;
}

}  // namespace

TEST(Roi, MarginAndClipping) {
  LabelMap mask({100, 100}, 0);
  for (std::size_t y = 20; y <= 40; ++y)
    for (std::size_t x = 30; x <= 50; ++x) mask.at(y, x) = 1;
  EXPECT_EQ(compute_roi(mask, 10), (Roi{10, 20, 50, 60, false}));

  LabelMap corner({64, 64}, 0);
  corner.at(2, 3) = 1;
  corner.at(60, 62) = 1;
  EXPECT_EQ(compute_roi(corner, 10), (Roi{0, 0, 63, 63, false}));
  EXPECT_TRUE(compute_roi(LabelMap({8, 8}, 0)).empty);
  EXPECT_EQ(compute_roi(LabelMap({8, 8}, 0)).height(), 0u);
}

TEST(Roi, StackUsesUnionOfSlices) {
  LabelMap stack({2, 50, 50}, 0);
  stack.at(0, 10, 10) = 1;
  stack[50 * 50 + 30 * 50 + 40] = 1;
  const Roi r = compute_roi(stack, 2);
  EXPECT_EQ(r, (Roi{8, 8, 32, 42, false}));
  EXPECT_TRUE(r.contains(8, 42));
  EXPECT_FALSE(r.contains(7, 42));
}

TEST(Argmax, TiesPickLowestClass) {
  Tensor logits({3, 1, 2}, std::vector<float>{1, 0, 1, 5, 0, 5});
  EXPECT_EQ(argmax_channels(logits).buffer(), (std::vector<std::uint8_t>{0, 1}));
}

TEST(Tiling, MatchesSinglePassOverMirroredImage) {
  Model model = Model::build(small_spec(4), 21);
  const std::size_t in = model.aligned_input_extent(60);
  const std::size_t o = model.output_extent(in);
  const std::size_t m = (in - o) / 2;
  const Tensor image = oracle::random_tensor<float>({4, o, o}, 3);

  const LabelMap reference = argmax_channels(model.predict(mirror_pad(image, m)));
  ASSERT_EQ(reference.shape(), (Shape{o, o}));

  EXPECT_EQ(predict_labels(model, image, std::nullopt, {in, 8}), reference);
  for (std::size_t tile : {model.min_input_extent(), in / 2 + 1}) {
    for (std::size_t batch : {1u, 3u}) {
      EXPECT_EQ(predict_labels(model, image, std::nullopt, {tile, batch}), reference)
          << "tile " << tile << " batch " << batch;
    }
  }
}

TEST(Tiling, RegionRestrictsOutput) {
  Model model = Model::build(small_spec(4), 5);
  const Tensor image = oracle::random_tensor<float>({4, 70, 66}, 8);
  const LabelMap full = predict_labels(model, image, std::nullopt, {48, 8});
  const Roi roi{13, 7, 40, 61, false};
  const LabelMap part = predict_labels(model, image, roi, {48, 8});
  for (std::size_t y = 0; y < 70; ++y)
    for (std::size_t x = 0; x < 66; ++x)
      EXPECT_EQ(part.at(y, x), roi.contains(y, x) ? full.at(y, x) : 0) << y << "," << x;
  EXPECT_THROW(predict_labels(model, image, Roi{0, 0, 70, 10, false}), Error);
  EXPECT_THROW(predict_labels(model, oracle::random_tensor<float>({3, 20, 20}, 1)), Error);
}

TEST(Tiling, ThreeScalesAgreeAcrossTilesAndRegions) {
  NetworkSpec s = small_spec(4);
  s.num_scales = 3;
  s.dilation_schedule = {3, 2, 1};
  Model model = Model::build(s, 17);
  const Tensor image = oracle::random_tensor<float>({4, 57, 61}, 2);
  const LabelMap full = predict_labels(model, image, std::nullopt, {200, 8});
  const std::size_t smallest = model.min_input_extent();
  EXPECT_EQ(predict_labels(model, image, std::nullopt, {smallest, 2}), full);
  const Roi roi{5, 19, 50, 33, false};
  const LabelMap part = predict_labels(model, image, roi, {smallest + 9, 8});
  for (std::size_t y = 0; y < 57; ++y)
    for (std::size_t x = 0; x < 61; ++x)
      ASSERT_EQ(part.at(y, x), roi.contains(y, x) ? full.at(y, x) : 0) << y << "," << x;
}

TEST(Cascade, EmptyStageOneGivesZeros) {
  Model stage1 = Model::build(small_spec(2), 1);
  Model stage2 = Model::build(small_spec(4), 2);
  stage1.parameters().at("head.bias").value[0] = 1e6f;
  const Tensor image = oracle::random_tensor<float>({4, 40, 40}, 9);
  const CascadeResult r = cascade_segment(image, stage1, stage2, 10, {48, 8});
  EXPECT_TRUE(r.roi.empty);
  EXPECT_EQ(r.labels, LabelMap({40, 40}, 0));
  EXPECT_EQ(r.stage1_mask, LabelMap({40, 40}, 0));
}

TEST(Cascade, SecondStageOnlyInsideRoi) {
  Model stage1 = Model::build(small_spec(2), 1);
  Model stage2 = Model::build(small_spec(4), 2);
  stage2.parameters().at("head.bias").value[2] = 1e6f;
  const Tensor image = oracle::random_tensor<float>({4, 50, 50}, 4);
  const CascadeResult r = cascade_segment(image, stage1, stage2, 3, {48, 8});
  EXPECT_EQ(r.roi, compute_roi(r.stage1_mask, 3));
  for (std::size_t y = 0; y < 50; ++y)
    for (std::size_t x = 0; x < 50; ++x)
      EXPECT_EQ(r.labels.at(y, x), r.roi.contains(y, x) ? 2 : 0);
}

TEST(Cascade, SliceStackAndValidation) {
  Model stage1 = Model::build(small_spec(2), 1);
  Model stage2 = Model::build(small_spec(4), 2);
  const Tensor stack = oracle::random_tensor<float>({2, 4, 30, 30}, 6);
  const CascadeResult r = cascade_segment(stack, stage1, stage2, 10, {48, 8});
  EXPECT_EQ(r.labels.shape(), (Shape{2, 30, 30}));
  EXPECT_THROW(cascade_segment(stack, stage2, stage2), Error);
}
