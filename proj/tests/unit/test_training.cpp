#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "oracles.hpp"
#include "rrse/config.hpp"
#include "rrse/training.hpp"

using namespace rrse;

namespace {

ParameterSet<double> scalar_params(double theta) {
  ParameterSet<double> p;
  p.add("theta", TensorD({1}, theta));
  return p;
}

Dataset tiny_dataset() {
  SynthConfig cfg;
  cfg.cases = 5;
  cfg.height = 64;
  cfg.width = 64;
  cfg.seed = 3;
  return Dataset{generate_synthetic_cases(cfg)};
}

NetworkSpec tiny_spec() {
  NetworkSpec s;
  s.base_channels = 4;
  s.convs_per_scale = 1;
  s.num_scales = 2;
  s.dilation_schedule = {2, 1};
  return s;
}

TrainConfig tiny_train(std::size_t patch) {
  TrainConfig t;
  t.iterations = 3;
  t.batch_size = 2;
  t.patch_size = patch;
  t.validation_every = 0;
  t.tile_input = 64;
  t.seed = 5;
  return t;
}

}  // namespace

TEST(Adam, FirstStepClosedForm) {
  auto params = scalar_params(0.0);
  AdamConfig cfg;
  cfg.weight_decay = 0.0;
  auto state = AdamState<double>::init(params, cfg);
  adam_step(params, {TensorD({1}, 2.0)}, state);
  const double m_hat = ((1 - 0.9) * 2.0) / (1 - 0.9);
  const double v_hat = ((1 - 0.999) * 4.0) / (1 - 0.999);
  const double expected = -5e-5 * m_hat / (std::sqrt(v_hat) + 1e-8);
  EXPECT_NEAR(params[0].value[0], expected, 1e-12);
  EXPECT_NEAR(params[0].value[0], -5e-5 * 2 / (2 + 1e-8), 1e-12);
  EXPECT_EQ(state.step, 1u);
}

TEST(Adam, ZeroGradientIsNoOpButCountsStep) {
  auto params = scalar_params(1.5);
  AdamConfig cfg;
  cfg.weight_decay = 0.0;
  auto state = AdamState<double>::init(params, cfg);
  adam_step(params, {TensorD({1}, 0.0)}, state);
  adam_step(params, {TensorD({1}, 0.0)}, state);
  EXPECT_EQ(params[0].value[0], 1.5);
  EXPECT_EQ(state.step, 2u);
}

TEST(Adam, ZeroLearningRateIsNoOp) {
  auto params = scalar_params(0.7);
  AdamConfig cfg;
  cfg.learning_rate = 0.0;
  auto state = AdamState<double>::init(params, cfg);
  adam_step(params, {TensorD({1}, 3.0)}, state);
  EXPECT_EQ(params[0].value[0], 0.7);
}

TEST(Adam, FirstStepMovesAgainstGradientSign) {
  ParameterSet<double> params;
  params.add("w", TensorD::zeros({16}));
  AdamConfig cfg;
  cfg.weight_decay = 0.0;
  auto state = AdamState<double>::init(params, cfg);
  const TensorD g = oracle::random_tensor<double>({16}, 2);
  adam_step(params, {g}, state);
  for (std::size_t i = 0; i < 16; ++i) {
    EXPECT_EQ(std::signbit(params[0].value[i]), !std::signbit(g[i]));
    EXPECT_NEAR(std::abs(params[0].value[i]), 5e-5, 1e-10);
  }
}

TEST(Adam, WeightDecayIsAddedToGradient) {
  auto params = scalar_params(1.0);
  AdamConfig cfg;
  cfg.weight_decay = 0.1;
  auto state = AdamState<double>::init(params, cfg);
  adam_step(params, {TensorD({1}, 0.0)}, state);
  EXPECT_NEAR(params[0].value[0], 1.0 - 5e-5 * 0.1 / (0.1 + 1e-8), 1e-15);
}

TEST(Adam, FrozenParametersAndNonFiniteGradients) {
  ParameterSet<double> params;
  params.add("a", TensorD({2}, 1.0));
  params.add("stat", TensorD({2}, 1.0), false);
  auto state = AdamState<double>::init(params, {});
  adam_step(params, {TensorD({2}, 1.0), TensorD()}, state);
  EXPECT_EQ(params[1].value[0], 1.0);
  TensorD bad({2}, 1.0);
  bad[1] = std::nan("");
  const double before = params[0].value[0];
  try {
    adam_step(params, {bad, TensorD()}, state);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("'a'"), std::string::npos);
  }
  EXPECT_EQ(params[0].value[0], before);
  EXPECT_GE(*std::min_element(state.v[0].values().begin(), state.v[0].values().end()), 0.0);
}

TEST(Augment, GroupProperties) {
  const TensorD x = oracle::random_tensor<double>({3, 6, 6}, 1);
  EXPECT_EQ(apply_augmentation(x, {false, 0}), x);
  TensorD r = x;
  for (int i = 0; i < 4; ++i) r = apply_augmentation(r, {false, 1});
  EXPECT_EQ(r, x);
  EXPECT_EQ(apply_augmentation(apply_augmentation(x, {true, 0}), {true, 0}), x);
  EXPECT_EQ(apply_augmentation(x, {false, 2}),
            apply_augmentation(apply_augmentation(x, {false, 1}), {false, 1}));
}

TEST(Augment, QuarterTurnIsCounterClockwise) {
  const TensorD x({1, 2, 2}, std::vector<double>{1, 2, 3, 4});
  EXPECT_EQ(apply_augmentation(x, {false, 1}).buffer(), (std::vector<double>{2, 4, 1, 3}));
  EXPECT_EQ(apply_augmentation(x, {true, 0}).buffer(), (std::vector<double>{2, 1, 4, 3}));
}

TEST(Augment, SameTransformOnImageAndLabels) {
  Tensor img({1, 5, 5});
  LabelMap lab({5, 5});
  for (std::size_t i = 0; i < 25; ++i) {
    img[i] = static_cast<float>(i);
    lab[i] = static_cast<std::uint8_t>(i);
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto [a, b] = augment(img, lab, seed);
    for (std::size_t i = 0; i < 25; ++i) EXPECT_EQ(a[i], static_cast<float>(b[i]));
    std::vector<std::uint8_t> sorted(b.values().begin(), b.values().end());
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(sorted, lab.buffer());
  }
}

TEST(Augment, RotationNeedsSquarePatch) {
  EXPECT_THROW(apply_augmentation(TensorD({1, 4, 5}), {false, 1}), Error);
  EXPECT_NO_THROW(apply_augmentation(TensorD({1, 4, 5}), {true, 0}));
}

TEST(Sampling, ClassBalancedCentres) {
  LabelMap l({40, 40}, 0);
  for (std::size_t y = 10; y < 14; ++y)
    for (std::size_t x = 10; x < 14; ++x) l.at(y, x) = 1;
  l.at(30, 30) = 2;
  l.at(31, 5) = 3;
  Rng rng(1);
  std::map<int, int> hits;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const PatchWindow w = sample_patch_window(l, 8, true, rng);
    ++hits[w.center_class];
    EXPECT_EQ(l.at(w.center_y, w.center_x), w.center_class);
  }
  for (int c = 0; c < 4; ++c) EXPECT_NEAR(hits[c] / double(draws), 0.25, 0.02) << "class " << c;
}

TEST(Sampling, SingleClassAndBorderClamp) {
  const LabelMap l({20, 20}, 2);
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const PatchWindow w = sample_patch_window(l, 10, true, rng);
    EXPECT_EQ(w.center_class, 2);
    EXPECT_LE(w.top + 10, 20u);
    EXPECT_LE(w.left + 10, 20u);
    if (w.center_y < 5) {
      EXPECT_EQ(w.top, 0u);
    }
  }
  EXPECT_THROW(sample_patch_window(l, 21, true, rng), Error);
}

TEST(Train, ZeroLearningRateKeepsTrainableParameters) {
  const Dataset data = tiny_dataset();
  Model m = Model::build(tiny_spec(), 2);
  const Model initial = m;
  TrainConfig t = tiny_train(m.aligned_input_extent(40));
  t.iterations = 1;
  t.adam.learning_rate = 0.0;
  train(m, data, t);
  for (std::size_t i = 0; i < m.parameters().size(); ++i) {
    if (m.parameters()[i].trainable) {
      EXPECT_EQ(m.parameters()[i].value, initial.parameters()[i].value);
    }
  }
}

TEST(Train, SameSeedSameHistoryAndWeights) {
  const Dataset data = tiny_dataset();
  Model a = Model::build(tiny_spec(), 2), b = Model::build(tiny_spec(), 2);
  TrainConfig t = tiny_train(a.aligned_input_extent(40));
  t.validation_every = 2;
  const TrainResult ra = train(a, data, t), rb = train(b, data, t);
  ASSERT_EQ(ra.history.size(), 3u);
  EXPECT_EQ(history_csv(ra.history), history_csv(rb.history));
  for (std::size_t i = 0; i < a.parameters().size(); ++i)
    EXPECT_EQ(a.parameters()[i].value, b.parameters()[i].value);
  EXPECT_EQ(ra.state.step, 3u);
}

TEST(Train, LossHalvesOnSyntheticTask) {
  const Dataset data = tiny_dataset();
  NetworkSpec s = tiny_spec();
  s.base_channels = 8;
  Model m = Model::build(s, 2);
  TrainConfig t = tiny_train(m.aligned_input_extent(48));
  t.iterations = 200;
  t.batch_size = 4;
  t.adam.learning_rate = 1e-3;
  const TrainResult r = train(m, data, t);
  auto mean = [&](std::size_t from, std::size_t to) {
    double s = 0;
    for (std::size_t i = from; i < to; ++i) s += r.history[i].train_loss;
    return s / double(to - from);
  };
  EXPECT_LT(mean(190, 200), 0.5 * mean(0, 10));
}

TEST(Train, DivergenceStopsWithFiniteParameters) {
  const Dataset data = tiny_dataset();
  Model m = Model::build(tiny_spec(), 2);
  TrainConfig t = tiny_train(m.aligned_input_extent(40));
  t.iterations = 50;
  t.adam.learning_rate = 1e30;
  const TrainResult r = train(m, data, t);
  EXPECT_TRUE(r.diverged);
  EXPECT_LT(r.history.size(), 50u);
  for (const auto& p : m.parameters())
    for (float v : p.value.values()) ASSERT_TRUE(std::isfinite(v)) << p.name;
}

TEST(Train, RejectsUnusablePatchSize) {
  const Dataset data = tiny_dataset();
  Model m = Model::build(tiny_spec(), 2);
  TrainConfig t = tiny_train(m.min_input_extent() - 1);
  EXPECT_THROW(train(m, data, t), Error);
  const std::size_t aligned = m.aligned_input_extent(40);
  t.patch_size = aligned + 1;
  if (!m.walk(aligned + 1, aligned + 1).aligned) {
    EXPECT_THROW(train(m, data, t), Error);
  }
}

TEST(Train, HistoryCsvLeavesValidationBlank) {
  HistoryRow a{1, 0.5, false, {}};
  HistoryRow b{2, 0.25, true, {0.9, 0.8, std::nan("")}};
  EXPECT_EQ(history_csv({a, b}),
            "iteration,train_loss,val_dice_whole,val_dice_core,val_dice_enh\n"
            "1,0.5,,,\n2,0.25,0.900000,0.800000,\n");
}

TEST(Loss, TensorHelperMatchesTape) {
  Tensor logits({4, 1, 1}, 0.0f);
  EXPECT_NEAR(crossentropy_loss(logits, LabelMap({1, 1}, 0)), std::log(4.0), 1e-12);
}
