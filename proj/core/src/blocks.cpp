#include "rrse/blocks.hpp"

#include <algorithm>

#include "rrse/random.hpp"

namespace rrse {

std::string to_string(RRMode mode) {
  switch (mode) {
    case RRMode::none: return "none";
    case RRMode::se: return "se";
    case RRMode::segse: return "segse";
  }
  return "none";
}

RRMode parse_rr_mode(std::string_view text) {
  if (text == "none") return RRMode::none;
  if (text == "se") return RRMode::se;
  if (text == "segse") return RRMode::segse;
  throw Error("unknown rr_mode '" + std::string(text) + "' (expected none, se or segse)");
}

std::size_t bottleneck_width(std::size_t channels, std::size_t r) {
  if (r == 0) throw Error("compression factor r must be >= 1");
  return std::max<std::size_t>(1, (channels + r - 1) / r);
}

std::size_t recombination_parameter_count(std::size_t channels, std::size_t expansion) {
  const std::size_t wide = expansion * channels;
  return channels * wide + wide + wide * channels + channels;
}

std::size_t se_parameter_count(std::size_t channels, std::size_t r) {
  const std::size_t b = bottleneck_width(channels, r);
  return channels * b * 2 + b + channels;
}

std::size_t segse_parameter_count(std::size_t channels, std::size_t r) {
  const std::size_t b = bottleneck_width(channels, r);
  return 9 * channels * b + b + channels * b + channels;
}

std::size_t rr_output_extent(std::size_t extent, RRMode mode, std::size_t dilation) {
  if (mode != RRMode::segse) return extent;
  return extent > 2 * dilation ? extent - 2 * dilation : 0;
}

template <typename T>
RecombinationParams<T> RecombinationParams<T>::make(std::size_t channels, std::size_t expansion,
                                                    std::uint64_t seed, const std::string& prefix) {
  if (expansion == 0) throw Error("expansion factor must be >= 1");
  RecombinationParams p;
  p.expansion_factor = expansion;
  p.expand = ConvParams<T>::make(channels, expansion * channels, 1, 1, mix_seed(seed, 0),
                                 prefix + ".expand");
  p.compress = ConvParams<T>::make(expansion * channels, channels, 1, 1, mix_seed(seed, 1),
                                   prefix + ".compress");
  return p;
}

template <typename T>
SEParams<T> SEParams<T>::make(std::size_t channels, std::size_t r, std::uint64_t seed,
                              const std::string& prefix) {
  const std::size_t b = bottleneck_width(channels, r);
  SEParams p;
  p.r = r;
  p.fc1 = ConvParams<T>::make(channels, b, 1, 1, mix_seed(seed, 0), prefix + ".fc1");
  p.fc2 = ConvParams<T>::make(b, channels, 1, 1, mix_seed(seed, 1), prefix + ".fc2");
  return p;
}

template <typename T>
SegSEParams<T> SegSEParams<T>::make(std::size_t channels, std::size_t r, std::size_t dilation,
                                    std::uint64_t seed, const std::string& prefix) {
  if (dilation == 0) throw Error("SegSE dilation must be >= 1");
  const std::size_t b = bottleneck_width(channels, r);
  SegSEParams p;
  p.r = r;
  p.compress =
      ConvParams<T>::make(channels, b, 3, dilation, mix_seed(seed, 0), prefix + ".compress");
  p.expand = ConvParams<T>::make(b, channels, 1, 1, mix_seed(seed, 1), prefix + ".expand");
  return p;
}

template <typename T>
RRParams<T> RRParams<T>::make(std::size_t channels, RRMode mode, std::size_t expansion,
                              std::size_t r, std::size_t dilation, std::uint64_t seed,
                              const std::string& prefix) {
  RRParams p;
  p.mode = mode;
  p.recombination =
      RecombinationParams<T>::make(channels, expansion, mix_seed(seed, 0), prefix + ".recomb");
  if (mode == RRMode::se) {
    p.se = SEParams<T>::make(channels, r, mix_seed(seed, 1), prefix + ".se");
  } else if (mode == RRMode::segse) {
    p.segse = SegSEParams<T>::make(channels, r, dilation, mix_seed(seed, 2), prefix + ".segse");
  }
  return p;
}

template <typename T>
std::size_t RRParams<T>::parameter_count() const {
  std::size_t n = recombination.parameter_count();
  if (se) n += se->parameter_count();
  if (segse) n += segse->parameter_count();
  return n;
}

namespace ad {

template <typename T>
ConvVars<T> bind(Tape<T>& tape, const ConvParams<T>& p, bool requires_grad) {
  return {tape.leaf(p.weight, requires_grad), tape.leaf(p.bias, requires_grad), p.dilation,
          p.name};
}

template <typename T>
Var<T> recombination(Var<T> x, const ConvVars<T>& expand, const ConvVars<T>& compress) {
  return conv(conv(x, expand), compress);
}

template <typename T>
Var<T> se_block(Var<T> x, const ConvVars<T>& fc1, const ConvVars<T>& fc2, Var<T>* gate) {
  Var<T> s = sigmoid(conv(relu(conv(global_avg_pool(x), fc1)), fc2));
  if (gate) *gate = s;
  return mul(x, s);
}

template <typename T>
Var<T> segse_block(Var<T> x, const ConvVars<T>& compress, const ConvVars<T>& expand,
                   Var<T>* gate) {
  const std::size_t r = x.shape().size();
  const std::size_t H = x.shape()[r - 2], W = x.shape()[r - 1];
  const std::size_t d = compress.dilation;
  if (H <= 2 * d || W <= 2 * d) {
    throw Error("SegSE block '" + compress.name + "': input " + std::to_string(H) + "x" +
                std::to_string(W) + " is too small for dilation " + std::to_string(d) +
                " (needs more than " + std::to_string(2 * d) + " per axis)");
  }
  Var<T> g = sigmoid(conv(relu(conv(x, compress)), expand));
  if (gate) *gate = g;
  return mul(g, center_crop(x, H - 2 * d, W - 2 * d));
}

template <typename T>
RRVars<T> bind(Tape<T>& tape, const RRParams<T>& p, bool requires_grad) {
  RRVars<T> v;
  v.mode = p.mode;
  v.expand = bind(tape, p.recombination.expand, requires_grad);
  v.compress = bind(tape, p.recombination.compress, requires_grad);
  if (p.mode == RRMode::se) {
    if (!p.se) throw Error("RR block in se mode has no SE parameters");
    v.recal_a = bind(tape, p.se->fc1, requires_grad);
    v.recal_b = bind(tape, p.se->fc2, requires_grad);
  } else if (p.mode == RRMode::segse) {
    if (!p.segse) throw Error("RR block in segse mode has no SegSE parameters");
    v.recal_a = bind(tape, p.segse->compress, requires_grad);
    v.recal_b = bind(tape, p.segse->expand, requires_grad);
  }
  return v;
}

template <typename T>
Var<T> rr_block(Var<T> x, const RRVars<T>& p) {
  Var<T> y = recombination(x, p.expand, p.compress);
  switch (p.mode) {
    case RRMode::none: return y;
    case RRMode::se: return se_block(y, p.recal_a, p.recal_b);
    case RRMode::segse: return segse_block(y, p.recal_a, p.recal_b);
  }
  return y;
}

}  // namespace ad

template <typename T>
BasicTensor<T> recombination(const BasicTensor<T>& x, const RecombinationParams<T>& p) {
  return conv1x1(conv1x1(x, p.expand), p.compress);
}

template <typename T>
BasicTensor<T> se_gate(const BasicTensor<T>& x, const SEParams<T>& p) {
  return sigmoid(conv1x1(relu(conv1x1(global_avg_pool(x), p.fc1)), p.fc2));
}

template <typename T>
BasicTensor<T> se_block(const BasicTensor<T>& x, const SEParams<T>& p) {
  return mul(x, se_gate(x, p));
}

template <typename T>
BasicTensor<T> segse_gate(const BasicTensor<T>& x, const SegSEParams<T>& p) {
  Tape<T> tape;
  Var<T> gate;
  ad::segse_block(tape.constant(x), ad::bind(tape, p.compress, false),
                  ad::bind(tape, p.expand, false), &gate);
  return gate.value();
}

template <typename T>
BasicTensor<T> segse_block(const BasicTensor<T>& x, const SegSEParams<T>& p) {
  Tape<T> tape;
  return ad::segse_block(tape.constant(x), ad::bind(tape, p.compress, false),
                         ad::bind(tape, p.expand, false))
      .value();
}

template <typename T>
BasicTensor<T> rr_block(const BasicTensor<T>& x, const RRParams<T>& p) {
  Tape<T> tape;
  return ad::rr_block(tape.constant(x), ad::bind(tape, p, false)).value();
}

#define RRSE_INSTANTIATE_BLOCKS(T)                                                              \
  template struct RecombinationParams<T>;                                                      \
  template struct SEParams<T>;                                                                 \
  template struct SegSEParams<T>;                                                              \
  template struct RRParams<T>;                                                                 \
  template BasicTensor<T> recombination(const BasicTensor<T>&, const RecombinationParams<T>&); \
  template BasicTensor<T> se_block(const BasicTensor<T>&, const SEParams<T>&);                 \
  template BasicTensor<T> se_gate(const BasicTensor<T>&, const SEParams<T>&);                  \
  template BasicTensor<T> segse_block(const BasicTensor<T>&, const SegSEParams<T>&);           \
  template BasicTensor<T> segse_gate(const BasicTensor<T>&, const SegSEParams<T>&);            \
  template BasicTensor<T> rr_block(const BasicTensor<T>&, const RRParams<T>&);                 \
  namespace ad {                                                                               \
  template ConvVars<T> bind(Tape<T>&, const ConvParams<T>&, bool);                             \
  template RRVars<T> bind(Tape<T>&, const RRParams<T>&, bool);                                 \
  template Var<T> recombination(Var<T>, const ConvVars<T>&, const ConvVars<T>&);               \
  template Var<T> se_block(Var<T>, const ConvVars<T>&, const ConvVars<T>&, Var<T>*);           \
  template Var<T> segse_block(Var<T>, const ConvVars<T>&, const ConvVars<T>&, Var<T>*);        \
  template Var<T> rr_block(Var<T>, const RRVars<T>&);                                          \
  }

RRSE_INSTANTIATE_BLOCKS(float)
RRSE_INSTANTIATE_BLOCKS(double)
#undef RRSE_INSTANTIATE_BLOCKS

}  // namespace rrse
