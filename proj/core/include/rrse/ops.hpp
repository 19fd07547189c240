#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rrse/tensor.hpp"

// Forward (and gradient) kernels for every layer type used by the networks.
// Feature maps are [C,H,W] or batched [N,C,H,W]; outputs keep the input rank.
// Convolutions are always stride 1 without padding.

namespace rrse {

enum class Mode { train, infer };

template <typename T>
struct ConvParams {
  BasicTensor<T> weight;  // [C_out, C_in, k_h, k_w]
  BasicTensor<T> bias;    // [C_out]
  std::size_t dilation = 1;
  std::string name = "conv";

  std::size_t out_channels() const { return weight.dim(0); }
  std::size_t in_channels() const { return weight.dim(1); }
  std::size_t kernel_h() const { return weight.dim(2); }
  std::size_t kernel_w() const { return weight.dim(3); }
  std::size_t parameter_count() const { return weight.size() + bias.size(); }

  /// He-normal weights (fan_in = C_in*k*k), zero bias.
  static ConvParams make(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
                         std::size_t dilation, std::uint64_t seed, std::string name = "conv");
};

/// Spatial extent after a valid convolution; throws naming `layer` when the
/// input does not cover the dilated receptive field.
std::size_t conv_output_extent(std::size_t input, std::size_t kernel, std::size_t dilation,
                               const std::string& layer);

template <typename T>
BasicTensor<T> conv2d_valid(const BasicTensor<T>& x, const ConvParams<T>& p);

/// Direct loop evaluation of the convolution sum, accumulated in double.
/// Reference for the im2col path.
template <typename T>
BasicTensor<T> conv2d_valid_naive(const BasicTensor<T>& x, const ConvParams<T>& p);

template <typename T>
BasicTensor<T> conv1x1(const BasicTensor<T>& x, const ConvParams<T>& p);

template <typename T>
BasicTensor<T> conv2d_grad_input(const BasicTensor<T>& dy, const BasicTensor<T>& weight,
                                 std::size_t dilation, const Shape& input_shape);

// Writes dL/dweight and dL/dbias (overwriting) for a batch.
template <typename T>
void conv2d_grad_params(const BasicTensor<T>& x, const BasicTensor<T>& dy, std::size_t dilation,
                        BasicTensor<T>& dweight, BasicTensor<T>& dbias);

/// 2x2 window, stride 2; a trailing odd row/column is dropped.
template <typename T>
BasicTensor<T> maxpool2d(const BasicTensor<T>& x);

/// Routes each output gradient to the first maximal element of its window
/// in row-major scan order.
template <typename T>
BasicTensor<T> maxpool2d_grad(const BasicTensor<T>& x, const BasicTensor<T>& dy);

template <typename T>
BasicTensor<T> upsample_nearest(const BasicTensor<T>& x, std::size_t factor = 2);

template <typename T>
BasicTensor<T> upsample_nearest_grad(const BasicTensor<T>& dy, std::size_t factor = 2);

/// Per-channel mean; output [C,1,1] (or [N,C,1,1]).
template <typename T>
BasicTensor<T> global_avg_pool(const BasicTensor<T>& x);

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& x);

template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& x);

/// Softmax across the channel axis at every spatial unit.
template <typename T>
BasicTensor<T> softmax_channels(const BasicTensor<T>& x);

template <typename T>
struct BatchNormParams {
  BasicTensor<T> gamma, beta;
  BasicTensor<T> running_mean, running_var;
  double epsilon = 1e-5;
  double momentum = 0.9;  // running = momentum * running + (1 - momentum) * batch

  static BatchNormParams make(std::size_t channels);
};

/// Everything the backward pass needs from a batch-norm forward.
template <typename T>
struct BatchNormResult {
  BasicTensor<T> output;
  BasicTensor<T> normalized;  // x_hat
  std::vector<T> inv_std;     // per channel
};

/// Train mode normalizes with the biased batch variance over (N,H,W) and,
/// when update_running is set, folds the unbiased variance into the running
/// statistics. Infer mode uses the running statistics.
template <typename T>
BatchNormResult<T> batchnorm2d_forward(const BasicTensor<T>& x, BatchNormParams<T>& p, Mode mode,
                                       bool update_running = true);

template <typename T>
BasicTensor<T> batchnorm2d(const BasicTensor<T>& x, BatchNormParams<T>& p, Mode mode);

template <typename T>
struct BatchNormGrads {
  BasicTensor<T> dx, dgamma, dbeta;
};

template <typename T>
BatchNormGrads<T> batchnorm2d_grad(const BasicTensor<T>& dy, const BatchNormResult<T>& fwd,
                                   const BasicTensor<T>& gamma, Mode mode);

/// Channel scale factors for inverted spatial dropout: 0 for dropped
/// channels, 1/(1-rate) for kept ones. Deterministic in `seed`.
template <typename T>
std::vector<T> spatial_dropout_scales(std::size_t channels, double rate, std::uint64_t seed);

template <typename T>
BasicTensor<T> spatial_dropout(const BasicTensor<T>& x, double rate, Mode mode, std::uint64_t seed);

}  // namespace rrse
