#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rrse/autodiff.hpp"
#include "rrse/blocks.hpp"

namespace rrse {

/// Declarative description of one FCN variant.
struct NetworkSpec {
  std::size_t num_scales = 3;
  std::size_t base_channels = 32;  // doubled at every coarser scale
  std::size_t convs_per_scale = 2;
  std::size_t input_channels = 4;
  std::size_t num_classes = 4;
  bool recombination = false;  // RR block present on the decoder path
  RRMode rr_mode = RRMode::none;
  std::vector<std::size_t> dilation_schedule = {3, 2, 1};  // finest -> coarsest
  std::size_t expansion_factor = 4;
  std::size_t se_r = 10;
  double width_multiplier = 1.0;

  /// round(base * 2^scale * width_multiplier), at least 1.
  std::size_t width(std::size_t scale) const;
  bool has_rr_blocks() const { return recombination; }
  void validate() const;

  bool operator==(const NetworkSpec&) const = default;
};

enum class LayerKind { conv, batchnorm, relu, dropout, maxpool, save_skip, upsample, merge_add, rr };

std::string to_string(LayerKind kind);

struct Layer {
  LayerKind kind = LayerKind::relu;
  std::string name;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 1;
  std::size_t dilation = 1;
  std::size_t slot = 0;  // skip slot for save_skip / merge_add
  RRMode mode = RRMode::none;
};

/// Concrete layer list of the encoder-decoder.
///
/// Encoder scale k: convs_per_scale x [3x3 conv, BN, ReLU], spatial dropout,
/// then (except at the coarsest scale) a skip save and 2x2 max-pool.
/// Decoder scale k < coarsest: 1x1 channel adjustment, nearest upsampling,
/// addition with the centre-cropped skip, the same conv stack, dropout.
/// With RR blocks, every decoder scale ends in rr{k+1} (dilation
/// schedule[k]) followed by a ReLU. A 1x1 head emits num_classes logits.
std::vector<Layer> build_layers(const NetworkSpec& spec);

/// Trainable scalar count of a spec, without allocating weights.
std::size_t count_parameters(const NetworkSpec& spec);

struct ShapeReport {
  bool valid = false;
  std::string error;
  std::size_t out_height = 0;
  std::size_t out_width = 0;
  /// Every pooled map has even extents and every crop removes an even
  /// number of rows/columns, so output pixel (y, x) sits exactly over input
  /// pixel (y + m, x + m) with m = (input - output) / 2.
  bool aligned = false;
  std::vector<std::pair<std::size_t, std::size_t>> layer_extents;
};

/// Symbolic spatial walk over a layer list.
ShapeReport walk_shapes(const std::vector<Layer>& layers, std::size_t height, std::size_t width);

template <typename T>
struct Parameter {
  std::string name;
  BasicTensor<T> value;
  bool trainable = true;
};

template <typename T>
class ParameterSet {
 public:
  std::size_t add(std::string name, BasicTensor<T> value, bool trainable = true);
  std::size_t index_of(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  Parameter<T>& at(const std::string& name) { return entries_[index_of(name)]; }
  const Parameter<T>& at(const std::string& name) const { return entries_[index_of(name)]; }
  Parameter<T>& operator[](std::size_t i) { return entries_[i]; }
  const Parameter<T>& operator[](std::size_t i) const { return entries_[i]; }
  std::size_t size() const noexcept { return entries_.size(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  std::size_t trainable_count() const;

 private:
  std::vector<Parameter<T>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct ForwardOptions {
  Mode mode = Mode::infer;
  double dropout_rate = 0.0;
  std::uint64_t seed = 0;          // dropout stream; layer i uses mix_seed(seed, i)
  bool update_batch_stats = true;  // train-mode BN running statistics
  std::vector<std::pair<std::size_t, std::size_t>>* trace = nullptr;
};

template <typename T>
class BasicModel {
 public:
  static BasicModel build(const NetworkSpec& spec, std::uint64_t seed);

  const NetworkSpec& spec() const noexcept { return spec_; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  ParameterSet<T>& parameters() noexcept { return params_; }
  const ParameterSet<T>& parameters() const noexcept { return params_; }
  std::size_t parameter_count() const { return params_.trainable_count(); }

  ShapeReport walk(std::size_t height, std::size_t width) const {
    return walk_shapes(layers_, height, width);
  }
  std::size_t min_input_extent() const;
  /// Square output extent; throws with the minimum valid size when too small.
  std::size_t output_extent(std::size_t input) const;
  /// Smallest aligned valid square input extent >= at_least.
  std::size_t aligned_input_extent(std::size_t at_least) const;

  /// Leaf variables for every parameter, in ParameterSet order. Running
  /// batch-norm statistics are always constants.
  std::vector<Var<T>> bind(Tape<T>& tape, bool requires_grad) const;

  Var<T> forward(Tape<T>& tape, Var<T> input, const std::vector<Var<T>>& params,
                 const ForwardOptions& options);

  /// Inference-mode logits for [C,H,W] or [N,C,H,W] input.
  BasicTensor<T> predict(const BasicTensor<T>& input);

  template <typename U>
  BasicModel<U> cast() const {
    BasicModel<U> out = BasicModel<U>::build(spec_, 0);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      out.parameters()[i].value = params_[i].value.template cast<U>();
    }
    return out;
  }

 private:
  NetworkSpec spec_;
  std::vector<Layer> layers_;
  std::vector<std::vector<std::size_t>> layer_params_;
  ParameterSet<T> params_;
};

using Model = BasicModel<float>;

Model build_mcfcn(const NetworkSpec& spec, std::uint64_t seed);

/// Whole-tumour stage: the baseline topology with two classes.
Model build_binary_fcn(const NetworkSpec& spec, std::uint64_t seed);

/// Finds the width multiplier in [1, 8] whose parameter count is within
/// `tolerance` (relative) of target_count.
NetworkSpec scale_width_to_match(const NetworkSpec& spec, std::size_t target_count,
                                 double tolerance = 0.05);

std::string network_spec_to_json(const NetworkSpec& spec);
/// Strict parse: unknown keys and wrong types are errors.
NetworkSpec network_spec_from_json(const std::string& text);

}  // namespace rrse
