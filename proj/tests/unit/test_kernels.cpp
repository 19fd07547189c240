#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "rrse/gemm.hpp"
#include "rrse/ops.hpp"

using namespace rrse;

namespace {

std::vector<double> matmul(const std::vector<double>& a, const std::vector<double>& b,
                           std::size_t M, std::size_t N, std::size_t K) {
  std::vector<double> c(M * N, 0.0);
  for (std::size_t i = 0; i < M; ++i)
    for (std::size_t j = 0; j < N; ++j)
      for (std::size_t k = 0; k < K; ++k) c[i * N + j] += a[i * K + k] * b[k * N + j];
  return c;
}

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST(Gemm, AllLayoutsMatchNaiveProduct) {
  std::mt19937_64 rng(3);
  for (auto [M, N, K] : {std::tuple{1ul, 1ul, 1ul}, {5ul, 7ul, 3ul}, {13ul, 600ul, 300ul},
                         {4ul, 9ul, 513ul}}) {
    const auto a = random_vec(M * K, rng), b = random_vec(K * N, rng);
    const auto ref = matmul(a, b, M, N, K);
    std::vector<double> at(K * M), bt(N * K);
    for (std::size_t i = 0; i < M; ++i)
      for (std::size_t k = 0; k < K; ++k) at[k * M + i] = a[i * K + k];
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t j = 0; j < N; ++j) bt[j * K + k] = b[k * N + j];

    std::vector<double> c(M * N, 1.0);
    gemm_nn(M, N, K, a.data(), K, b.data(), N, c.data(), N, false);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c[i], ref[i], 1e-9);
    gemm_tn(M, N, K, at.data(), M, b.data(), N, c.data(), N, false);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c[i], ref[i], 1e-9);
    gemm_nt(M, N, K, a.data(), K, bt.data(), K, c.data(), N, true);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c[i], 2 * ref[i], 1e-9);
  }
}

TEST(Conv, FastPathMatchesDirectLoops) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::size_t> ch(1, 6), dil(1, 3), extra(0, 6), kern(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = kern(rng) ? 3 : 1, d = dil(rng);
    const std::size_t ci = ch(rng), co = ch(rng);
    const std::size_t h = (k - 1) * d + 1 + extra(rng), w = (k - 1) * d + 1 + extra(rng);
    auto p = ConvParams<float>::make(ci, co, k, d, trial);
    p.bias = oracle::random_tensor<float>({co}, 100 + trial);
    const Tensor x = oracle::random_tensor<float>({2, ci, h, w}, 200 + trial);
    const Tensor ref = oracle::conv2d(x, p.weight, p.bias, d);
    const Tensor got = conv2d_valid(x, p);
    ASSERT_EQ(got.shape(), ref.shape());
    EXPECT_LT(max_relative_error(got, ref), 1e-6) << "trial " << trial;
  }
}

TEST(Conv, RankThreeInputKeepsRank) {
  const auto p = ConvParams<float>::make(2, 3, 3, 2, 1);
  const Tensor y = conv2d_valid(oracle::random_tensor<float>({2, 9, 8}, 1), p);
  EXPECT_EQ(y.shape(), (Shape{3, 5, 4}));
}

TEST(Conv, TooSmallInputNamesTheLayer) {
  auto p = ConvParams<float>::make(1, 1, 3, 3, 1, "scale0.conv0");
  try {
    conv2d_valid(Tensor({1, 6, 10}), p);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("scale0.conv0"), std::string::npos);
  }
}

TEST(Conv, NaiveKernelAgreesWithOracle) {
  auto p = ConvParams<double>::make(3, 2, 3, 2, 4);
  const TensorD x = oracle::random_tensor<double>({1, 3, 9, 7}, 8);
  EXPECT_LT(max_relative_error(conv2d_valid_naive(x, p), oracle::conv2d(x, p.weight, p.bias, 2)),
            1e-12);
}

TEST(Ops, MaxPoolTiesPickFirstInScanOrder) {
  const Tensor x({1, 2, 2}, std::vector<float>{5, 5, 5, 5});
  Tensor dy({1, 1, 1}, 1.0f);
  const Tensor dx = maxpool2d_grad(x, dy);
  EXPECT_EQ(dx.buffer(), (std::vector<float>{1, 0, 0, 0}));
  EXPECT_EQ(maxpool2d(x)[0], 5.0f);
}

TEST(Ops, MaxPoolDropsOddEdge) {
  const Tensor y = maxpool2d(oracle::random_tensor<float>({2, 5, 7}, 2));
  EXPECT_EQ(y.shape(), (Shape{2, 2, 3}));
}

TEST(Ops, UpsampleRepeatsPixels) {
  const Tensor x({1, 1, 2}, std::vector<float>{1, 2});
  const Tensor y = upsample_nearest(x, 2);
  EXPECT_EQ(y.shape(), (Shape{1, 2, 4}));
  EXPECT_EQ(y.buffer(), (std::vector<float>{1, 1, 2, 2, 1, 1, 2, 2}));
}

TEST(Ops, GlobalAveragePool) {
  const Tensor x({2, 1, 2}, std::vector<float>{1, 3, -2, 6});
  EXPECT_EQ(global_avg_pool(x).buffer(), (std::vector<float>{2, 2}));
  EXPECT_EQ(global_avg_pool(x).shape(), (Shape{2, 1, 1}));
}

TEST(Ops, SigmoidIsStableAtExtremes) {
  const Tensor y = sigmoid(Tensor({3}, std::vector<float>{-1000, 0, 1000}));
  EXPECT_EQ(y[0], 0.0f);
  EXPECT_EQ(y[1], 0.5f);
  EXPECT_EQ(y[2], 1.0f);
}

TEST(Ops, SoftmaxSumsToOne) {
  const TensorD p = softmax_channels(oracle::random_tensor<double>({2, 4, 3, 3}, 5, 10.0));
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t i = 0; i < 9; ++i) {
      double s = 0;
      for (std::size_t c = 0; c < 4; ++c) s += p[(n * 4 + c) * 9 + i];
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(Ops, BatchNormTrainNormalizesAndTracksUnbiasedVariance) {
  const TensorD x = oracle::random_tensor<double>({4, 2, 3, 3}, 9, 3.0);
  auto p = BatchNormParams<double>::make(2);
  const auto r = batchnorm2d_forward(x, p, Mode::train, true);
  for (std::size_t c = 0; c < 2; ++c) {
    double mean = 0, var = 0, raw_mean = 0, raw_sq = 0;
    const double m = 4 * 9;
    for (std::size_t n = 0; n < 4; ++n)
      for (std::size_t i = 0; i < 9; ++i) {
        mean += r.output[(n * 2 + c) * 9 + i] / m;
        raw_mean += x[(n * 2 + c) * 9 + i] / m;
      }
    for (std::size_t n = 0; n < 4; ++n)
      for (std::size_t i = 0; i < 9; ++i) {
        var += std::pow(r.output[(n * 2 + c) * 9 + i] - mean, 2) / m;
        raw_sq += std::pow(x[(n * 2 + c) * 9 + i] - raw_mean, 2);
      }
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(var, 1.0, 1e-4);  // eps = 1e-5 keeps it slightly below one
    EXPECT_NEAR(p.running_mean[c], 0.1 * raw_mean, 1e-12);
    EXPECT_NEAR(p.running_var[c], 0.9 + 0.1 * raw_sq / (m - 1), 1e-12);
  }
}

TEST(Ops, BatchNormInferUsesRunningStatistics) {
  auto p = BatchNormParams<double>::make(1);
  p.running_mean[0] = 2.0;
  p.running_var[0] = 4.0;
  p.gamma[0] = 3.0;
  p.beta[0] = 1.0;
  const TensorD y = batchnorm2d(TensorD({1, 1, 1}, std::vector<double>{6.0}), p, Mode::infer);
  EXPECT_NEAR(y[0], 3.0 * (6.0 - 2.0) / std::sqrt(4.0 + 1e-5) + 1.0, 1e-12);
}

TEST(Ops, SpatialDropoutZeroesWholeChannels) {
  const Tensor x = Tensor::ones({2, 16, 3, 3});
  const Tensor y = spatial_dropout(x, 0.5, Mode::train, 42);
  std::size_t dropped = 0;
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t c = 0; c < 16; ++c) {
      const float first = y.at(n, c, 0, 0);
      EXPECT_TRUE(first == 0.0f || first == 2.0f);
      for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(y[(n * 16 + c) * 9 + i], first);
      dropped += first == 0.0f;
    }
  EXPECT_GT(dropped, 0u);
  EXPECT_LT(dropped, 32u);
  EXPECT_EQ(spatial_dropout(x, 0.5, Mode::infer, 42), x);
  EXPECT_EQ(spatial_dropout(x, 0.0, Mode::train, 42), x);
  EXPECT_EQ(y, spatial_dropout(x, 0.5, Mode::train, 42));
  EXPECT_THROW(spatial_dropout(x, 1.0, Mode::train, 42), Error);
}
