#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

#include "rrse/ops.hpp"
#include "rrse/tensor.hpp"

namespace rrse {

template <typename T>
class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
template <typename T>
class Var {
 public:
  Var() = default;
  Var(Tape<T>* tape, std::size_t index) : tape_(tape), index_(index) {}

  bool valid() const noexcept { return tape_ != nullptr; }
  Tape<T>& tape() const { return *tape_; }
  std::size_t index() const noexcept { return index_; }
  const BasicTensor<T>& value() const;
  const Shape& shape() const { return value().shape(); }

 private:
  Tape<T>* tape_ = nullptr;
  std::size_t index_ = 0;
};

/// Reverse-mode record of one forward pass. Nodes are appended in
/// evaluation order, so the node list is already topologically sorted.
template <typename T>
class Tape {
 public:
  using TensorT = BasicTensor<T>;
  using BackwardFn = std::function<void(Tape&, std::size_t node)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> leaf(TensorT value, bool requires_grad = true);
  Var<T> constant(TensorT value) { return leaf(std::move(value), false); }

  /// Appends an op result. The node requires grad iff any parent does; the
  /// backward rule then receives the node's accumulated output gradient.
  Var<T> record(TensorT value, std::initializer_list<Var<T>> parents, BackwardFn backward);

  const TensorT& value(std::size_t node) const { return nodes_.at(node).value; }
  const TensorT& value(Var<T> v) const { return value(v.index()); }
  bool requires_grad(Var<T> v) const { return nodes_.at(v.index()).requires_grad; }
  const std::vector<std::size_t>& parents(Var<T> v) const { return nodes_.at(v.index()).parents; }

  /// Output gradient of `node` during backward().
  const TensorT& incoming(std::size_t node) const { return nodes_.at(node).grad; }

  /// Adds g into target's gradient; ignored for nodes without requires_grad.
  void accumulate(Var<T> target, TensorT g);

  /// Seeds d(loss)/d(loss) = 1 and sweeps the tape in reverse. Gradients
  /// from a previous backward() are discarded first.
  void backward(Var<T> loss);

  /// Gradient of the last backward() loss; zeros if `v` was not reached.
  TensorT grad(Var<T> v) const;

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    TensorT value;
    TensorT grad;
    std::vector<std::size_t> parents;
    BackwardFn backward;
    bool requires_grad = false;
  };
  std::vector<Node> nodes_;
};

template <typename T>
const BasicTensor<T>& Var<T>::value() const {
  return tape_->value(index_);
}

using TapeF = Tape<float>;
using TapeD = Tape<double>;
using VarF = Var<float>;
using VarD = Var<double>;

/// Differentiable counterparts of the kernels in ops.hpp.
namespace ad {

template <typename T>
Var<T> add(Var<T> a, Var<T> b);
template <typename T>
Var<T> mul(Var<T> a, Var<T> b);
template <typename T>
Var<T> scale(Var<T> a, T factor);

template <typename T>
Var<T> conv2d(Var<T> x, Var<T> weight, Var<T> bias, std::size_t dilation,
              const std::string& name = "conv");

template <typename T>
Var<T> relu(Var<T> x);
template <typename T>
Var<T> sigmoid(Var<T> x);
template <typename T>
Var<T> maxpool2d(Var<T> x);
template <typename T>
Var<T> upsample_nearest(Var<T> x, std::size_t factor = 2);
template <typename T>
Var<T> global_avg_pool(Var<T> x);
template <typename T>
Var<T> center_crop(Var<T> x, std::size_t height, std::size_t width);

/// Running statistics are bookkeeping outside the graph; they are only
/// touched when mode == train and update_running is set.
template <typename T>
Var<T> batchnorm2d(Var<T> x, Var<T> gamma, Var<T> beta, BasicTensor<T>& running_mean,
                   BasicTensor<T>& running_var, Mode mode, bool update_running,
                   double epsilon = 1e-5, double momentum = 0.9);

/// The channel mask is a pure function of `seed`, so a fixed seed makes the
/// op a fixed linear scaling.
template <typename T>
Var<T> spatial_dropout(Var<T> x, double rate, Mode mode, std::uint64_t seed);

/// Mean over all N*h*w units of -log softmax(logits)[target]. Logits are
/// [K,h,w] with target [h,w], or [N,K,h,w] with target [N,h,w].
template <typename T>
Var<T> softmax_cross_entropy(Var<T> logits, const LabelMap& target);

template <typename T>
Var<T> sum(Var<T> x);

/// sum(x * weights) with constant weights.
template <typename T>
Var<T> weighted_sum(Var<T> x, const BasicTensor<T>& weights);

}  // namespace ad
}  // namespace rrse
