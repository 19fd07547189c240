#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "rrse/autodiff.hpp"
#include "rrse/ops.hpp"

// Recombination and recalibration blocks.
//
//   recombination: 1x1 expand (C -> e*C), 1x1 compress (e*C -> C), no
//                  nonlinearity in between.
//   SE:            gate[c] = sigmoid(fc2(relu(fc1(gap(x)))))[c], out = gate * x
//                  with one scalar per feature map.
//   SegSE:         gate = sigmoid(expand(relu(compress_d(x)))) where compress_d
//                  is a 3x3 conv with dilation d that also reduces C to
//                  ceil(C/r); out = gate * center_crop(x). The gate varies per
//                  spatial unit and the map shrinks by 2d per axis.
//   RR:            recombination followed by SE, SegSE, or nothing.

namespace rrse {

enum class RRMode { none, se, segse };

std::string to_string(RRMode mode);
RRMode parse_rr_mode(std::string_view text);

/// ceil(channels / r), at least 1.
std::size_t bottleneck_width(std::size_t channels, std::size_t r);

std::size_t recombination_parameter_count(std::size_t channels, std::size_t expansion);
std::size_t se_parameter_count(std::size_t channels, std::size_t r);
std::size_t segse_parameter_count(std::size_t channels, std::size_t r);

/// Spatial extent after an RR block (only SegSE shrinks the map).
std::size_t rr_output_extent(std::size_t extent, RRMode mode, std::size_t dilation);

template <typename T>
struct RecombinationParams {
  ConvParams<T> expand;    // 1x1, C -> e*C
  ConvParams<T> compress;  // 1x1, e*C -> C
  std::size_t expansion_factor = 4;

  static RecombinationParams make(std::size_t channels, std::size_t expansion,
                                  std::uint64_t seed, const std::string& prefix = "recomb");
  std::size_t parameter_count() const {
    return expand.parameter_count() + compress.parameter_count();
  }
};

template <typename T>
struct SEParams {
  ConvParams<T> fc1;  // 1x1, C -> ceil(C/r)
  ConvParams<T> fc2;  // 1x1, ceil(C/r) -> C
  std::size_t r = 10;

  static SEParams make(std::size_t channels, std::size_t r, std::uint64_t seed,
                       const std::string& prefix = "se");
  std::size_t parameter_count() const { return fc1.parameter_count() + fc2.parameter_count(); }
};

template <typename T>
struct SegSEParams {
  ConvParams<T> compress;  // 3x3 dilated, C -> ceil(C/r)
  ConvParams<T> expand;    // 1x1, ceil(C/r) -> C
  std::size_t r = 10;

  std::size_t dilation() const { return compress.dilation; }
  static SegSEParams make(std::size_t channels, std::size_t r, std::size_t dilation,
                          std::uint64_t seed, const std::string& prefix = "segse");
  std::size_t parameter_count() const {
    return compress.parameter_count() + expand.parameter_count();
  }
};

template <typename T>
struct RRParams {
  RecombinationParams<T> recombination;
  RRMode mode = RRMode::none;
  std::optional<SEParams<T>> se;
  std::optional<SegSEParams<T>> segse;

  static RRParams make(std::size_t channels, RRMode mode, std::size_t expansion, std::size_t r,
                       std::size_t dilation, std::uint64_t seed, const std::string& prefix = "rr");
  std::size_t parameter_count() const;
};

template <typename T>
BasicTensor<T> recombination(const BasicTensor<T>& x, const RecombinationParams<T>& p);

template <typename T>
BasicTensor<T> se_block(const BasicTensor<T>& x, const SEParams<T>& p);

/// Channel gates in (0,1); shape [C,1,1] (or [N,C,1,1]).
template <typename T>
BasicTensor<T> se_gate(const BasicTensor<T>& x, const SEParams<T>& p);

template <typename T>
BasicTensor<T> segse_block(const BasicTensor<T>& x, const SegSEParams<T>& p);

/// Spatial gate map in (0,1); shape [C, H-2d, W-2d].
template <typename T>
BasicTensor<T> segse_gate(const BasicTensor<T>& x, const SegSEParams<T>& p);

template <typename T>
BasicTensor<T> rr_block(const BasicTensor<T>& x, const RRParams<T>& p);

namespace ad {

template <typename T>
struct ConvVars {
  Var<T> weight;
  Var<T> bias;
  std::size_t dilation = 1;
  std::string name;
};

template <typename T>
ConvVars<T> bind(Tape<T>& tape, const ConvParams<T>& p, bool requires_grad);

template <typename T>
Var<T> conv(Var<T> x, const ConvVars<T>& c) {
  return conv2d(x, c.weight, c.bias, c.dilation, c.name);
}

template <typename T>
Var<T> recombination(Var<T> x, const ConvVars<T>& expand, const ConvVars<T>& compress);

// `gate`, when given, receives the recalibration gate node.
template <typename T>
Var<T> se_block(Var<T> x, const ConvVars<T>& fc1, const ConvVars<T>& fc2, Var<T>* gate = nullptr);

template <typename T>
Var<T> segse_block(Var<T> x, const ConvVars<T>& compress, const ConvVars<T>& expand,
                   Var<T>* gate = nullptr);

template <typename T>
struct RRVars {
  ConvVars<T> expand, compress;
  RRMode mode = RRMode::none;
  ConvVars<T> recal_a, recal_b;  // SE: fc1/fc2; SegSE: compress/expand
};

template <typename T>
RRVars<T> bind(Tape<T>& tape, const RRParams<T>& p, bool requires_grad);

template <typename T>
Var<T> rr_block(Var<T> x, const RRVars<T>& p);

}  // namespace ad
}  // namespace rrse
