#include <gtest/gtest.h>

#include <algorithm>

#include "oracles.hpp"
#include "rrse/blocks.hpp"

using namespace rrse;

TEST(Blocks, BottleneckWidthRoundsUp) {
  EXPECT_EQ(bottleneck_width(32, 10), 4u);
  EXPECT_EQ(bottleneck_width(30, 10), 3u);
  EXPECT_EQ(bottleneck_width(4, 10), 1u);
  EXPECT_THROW(bottleneck_width(4, 0), Error);
}

TEST(Blocks, ParameterCountsMatchInstantiatedTensors) {
  for (std::size_t c : {4u, 16u, 33u}) {
    const auto rp = RecombinationParams<float>::make(c, 4, 1);
    EXPECT_EQ(rp.parameter_count(), recombination_parameter_count(c, 4));
    EXPECT_EQ(recombination_parameter_count(c, 4), 2 * 4 * c * c + 4 * c + c);
    const auto se = SEParams<float>::make(c, 10, 1);
    EXPECT_EQ(se.parameter_count(), se_parameter_count(c, 10));
    const auto sg = SegSEParams<float>::make(c, 10, 2, 1);
    EXPECT_EQ(sg.parameter_count(), segse_parameter_count(c, 10));
    const std::size_t b = (c + 9) / 10;
    EXPECT_EQ(segse_parameter_count(c, 10), 9 * c * b + b + b * c + c);
  }
}

TEST(Blocks, RecombinationIsAffine) {
  // No nonlinearity between expansion and compression: f(a + b) - f(0) = f(a) - f(0) + f(b) - f(0).
  const auto p = RecombinationParams<double>::make(5, 4, 3);
  const TensorD a = oracle::random_tensor<double>({5, 3, 3}, 1);
  const TensorD b = oracle::random_tensor<double>({5, 3, 3}, 2);
  const TensorD zero = TensorD::zeros({5, 3, 3});
  const TensorD lhs = add(recombination(add(a, b), p), recombination(zero, p));
  const TensorD rhs = add(recombination(a, p), recombination(b, p));
  EXPECT_LT(max_relative_error(lhs, rhs), 1e-12);
}

TEST(Blocks, SEGateIsConstantPerChannel) {
  const auto p = SEParams<double>::make(8, 4, 5);
  const TensorD x = oracle::random_tensor<double>({2, 8, 5, 6}, 7);
  const TensorD y = se_block(x, p);
  const TensorD g = se_gate(x, p);
  EXPECT_EQ(g.shape(), (Shape{2, 8, 1, 1}));
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t c = 0; c < 8; ++c) {
      EXPECT_GT(g.at(n, c, 0, 0), 0.0);
      EXPECT_LT(g.at(n, c, 0, 0), 1.0);
      for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 6; ++j)
          EXPECT_NEAR(y.at(n, c, i, j), g.at(n, c, 0, 0) * x.at(n, c, i, j), 1e-15);
    }
}

TEST(Blocks, SegSEGateVariesSpatiallyAndShrinksBy2d) {
  for (std::size_t d : {1u, 2u, 3u}) {
    const auto p = SegSEParams<double>::make(6, 3, d, 11);
    const TensorD x = oracle::random_tensor<double>({6, 12, 13}, 12);
    const TensorD g = segse_gate(x, p);
    EXPECT_EQ(g.shape(), (Shape{6, 12 - 2 * d, 13 - 2 * d}));
    const TensorD y = segse_block(x, p);
    const TensorD xc = center_crop(x, 12 - 2 * d, 13 - 2 * d);
    EXPECT_LT(max_relative_error(y, mul(g, xc)), 1e-15);
    const auto [lo, hi] = std::minmax_element(g.values().begin(), g.values().begin() + g.size() / 6);
    EXPECT_GT(*hi / *lo, 1.0);
  }
}

TEST(Blocks, SegSERejectsTooSmallInput) {
  const auto p = SegSEParams<double>::make(4, 2, 3, 1, "rr1.segse");
  try {
    segse_block(TensorD({4, 6, 20}, 1.0), p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("dilation 3"), std::string::npos);
  }
}

TEST(Blocks, RRModesComposeRecombinationFirst) {
  const TensorD x = oracle::random_tensor<double>({1, 6, 9, 9}, 3);
  const auto none = RRParams<double>::make(6, RRMode::none, 4, 3, 2, 9);
  EXPECT_EQ(rr_block(x, none), recombination(x, none.recombination));
  const auto se = RRParams<double>::make(6, RRMode::se, 4, 3, 2, 9);
  EXPECT_LT(max_relative_error(rr_block(x, se), se_block(recombination(x, se.recombination), *se.se)),
            1e-15);
  const auto sg = RRParams<double>::make(6, RRMode::segse, 4, 3, 2, 9);
  EXPECT_EQ(rr_block(x, sg).shape(), (Shape{1, 6, 5, 5}));
  EXPECT_EQ(rr_output_extent(9, RRMode::segse, 2), 5u);
  EXPECT_EQ(rr_output_extent(9, RRMode::se, 2), 9u);
}

TEST(Blocks, ParseMode) {
  EXPECT_EQ(parse_rr_mode("segse"), RRMode::segse);
  EXPECT_EQ(to_string(RRMode::se), "se");
  EXPECT_THROW(parse_rr_mode("SE"), Error);
}
