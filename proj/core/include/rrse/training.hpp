#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rrse/checkpoint.hpp"
#include "rrse/dataset.hpp"
#include "rrse/inference.hpp"
#include "rrse/network.hpp"
#include "rrse/random.hpp"

namespace rrse {

struct AdamConfig {
  double learning_rate = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 1e-6;  // coupled: lambda * theta is added to the gradient

  bool operator==(const AdamConfig&) const = default;
};

template <typename T>
struct AdamState {
  AdamConfig config;
  std::size_t step = 0;
  std::vector<BasicTensor<T>> m;  // first moments, one per parameter
  std::vector<BasicTensor<T>> v;  // second moments

  static AdamState init(const ParameterSet<T>& params, const AdamConfig& config);
};

/// One bias-corrected Adam update of every trainable parameter. grads[i]
/// belongs to params[i]; entries of frozen parameters are ignored. The step
/// counter advances even when every gradient is zero. Non-finite gradients
/// throw with the parameter name before anything is modified.
template <typename T>
void adam_step(ParameterSet<T>& params, const std::vector<BasicTensor<T>>& grads,
               AdamState<T>& state);

/// Mean -log softmax(logits)[target] over all units.
double crossentropy_loss(const Tensor& logits, const LabelMap& target);

struct Augmentation {
  bool flip = false;        // mirror along the width axis
  unsigned rotations = 0;   // counter-clockwise quarter turns, applied after the flip
};

struct AugmentOptions {
  bool flip = true;
  bool rotate = true;
};

Augmentation draw_augmentation(Rng& rng, const AugmentOptions& options);

/// Applies the transform to the trailing two axes. Rotation needs a square map.
template <typename T>
BasicTensor<T> apply_augmentation(const BasicTensor<T>& x, const Augmentation& aug);

/// Flip with probability 1/2, then k uniform in {0,1,2,3} quarter turns;
/// image and labels get the same transform.
std::pair<Tensor, LabelMap> augment(const Tensor& image, const LabelMap& labels,
                                    std::uint64_t seed, const AugmentOptions& options = {});

struct PatchWindow {
  std::size_t top = 0, left = 0;
  std::size_t center_y = 0, center_x = 0;
  int center_class = -1;  // -1 for uniform spatial sampling
};

/// With class balancing, picks a class uniformly among those present and then
/// one of its pixels uniformly; otherwise a uniform pixel. The patch is
/// centred there and shifted to stay inside the image.
PatchWindow sample_patch_window(const LabelMap& labels, std::size_t patch, bool class_balancing,
                                Rng& rng);

struct TrainConfig {
  std::size_t iterations = 200;
  std::size_t batch_size = 8;
  std::size_t patch_size = 92;
  double dropout_rate = 0.05;
  bool flip = true;
  bool rotate = true;
  bool class_balancing = true;
  std::uint64_t seed = 1;
  std::size_t validation_every = 50;  // 0 disables periodic validation
  std::size_t tile_input = 128;
  AdamConfig adam;

  bool operator==(const TrainConfig&) const = default;
};

struct Batch {
  Tensor images;    // [N,C,P,P]
  LabelMap targets; // [N,o,o], centre crop of the label patch
};

/// Draws a batch: case uniform over `cases`, window by sample_patch_window,
/// augmentation, then the target is cropped to the network output window.
/// `fuse` maps labels to {0,1} first.
Batch sample_batch(std::span<const Case* const> cases, std::size_t batch_size, std::size_t patch,
                   std::size_t output, const TrainConfig& cfg, bool fuse, Rng& rng);

struct HistoryRow {
  std::size_t iteration = 0;
  double train_loss = 0.0;
  bool has_validation = false;
  std::array<double, 3> val_dice{};  // whole, core, enhancing; NaN when undefined
};

struct TrainResult {
  std::vector<HistoryRow> history;
  TrainingState state;
  bool diverged = false;
  std::string divergence;
};

/// Mean Dice per region over whole images labelled by tiled inference.
/// Binary models are scored on the fused whole region only.
std::array<double, 3> validation_dice(Model& model, std::span<const Case* const> cases,
                                      std::size_t tile_input);

/// sample -> augment -> forward -> loss -> backward -> Adam, iterations
/// times. Iteration i draws from streams derived from (seed, i), so the run
/// is deterministic. A non-finite loss or gradient stops training with the
/// parameters of the last finite step.
TrainResult train(Model& model, const Dataset& data, const TrainConfig& cfg,
                  const std::function<void(const HistoryRow&)>& on_row = {});

/// `iteration,train_loss,val_dice_whole,val_dice_core,val_dice_enh`; blank
/// validation fields on rows without validation.
std::string history_csv(const std::vector<HistoryRow>& history);

}  // namespace rrse
