#include "rrse/autodiff.hpp"

#include <cmath>
#include <limits>

namespace rrse {

template <typename T>
Var<T> Tape<T>::leaf(TensorT value, bool requires_grad) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  nodes_.push_back(std::move(node));
  return Var<T>(this, nodes_.size() - 1);
}

template <typename T>
Var<T> Tape<T>::record(TensorT value, std::initializer_list<Var<T>> parents, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  for (const Var<T>& p : parents) {
    if (&p.tape() != this || p.index() >= nodes_.size()) {
      throw Error("autodiff: parent does not belong to this tape");
    }
    node.parents.push_back(p.index());
    node.requires_grad = node.requires_grad || nodes_[p.index()].requires_grad;
  }
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var<T>(this, nodes_.size() - 1);
}

template <typename T>
void Tape<T>::accumulate(Var<T> target, TensorT g) {
  Node& node = nodes_.at(target.index());
  if (!node.requires_grad) return;
  if (g.shape() != node.value.shape()) {
    throw Error("autodiff: gradient shape " + shape_str(g.shape()) + " does not match value " +
                shape_str(node.value.shape()));
  }
  if (node.grad.empty()) {
    node.grad = std::move(g);
  } else {
    for (std::size_t i = 0; i < g.size(); ++i) node.grad[i] += g[i];
  }
}

template <typename T>
void Tape<T>::backward(Var<T> loss) {
  if (&loss.tape() != this) throw Error("autodiff: loss belongs to another tape");
  const Node& root = nodes_.at(loss.index());
  if (root.value.size() != 1) {
    throw Error("autodiff: backward needs a scalar loss, got shape " +
                shape_str(root.value.shape()));
  }
  for (Node& n : nodes_) n.grad = TensorT();
  if (!root.requires_grad) return;
  nodes_[loss.index()].grad = TensorT::ones(root.value.shape());
  for (std::size_t i = loss.index() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.grad.empty() || !n.backward) continue;
    n.backward(*this, i);
  }
}

template <typename T>
BasicTensor<T> Tape<T>::grad(Var<T> v) const {
  const Node& n = nodes_.at(v.index());
  return n.grad.empty() ? TensorT::zeros(n.value.shape()) : n.grad;
}

template class Tape<float>;
template class Tape<double>;

namespace ad {
namespace {

template <typename T>
BasicTensor<T> reduce_to_channels(const BasicTensor<T>& g, const Shape& channel_shape) {
  const Dims4 d = as_nchw(g.shape());
  BasicTensor<T> out(channel_shape);
  for (std::size_t p = 0; p < d.n * d.c; ++p) {
    T acc = 0;
    const T* src = g.data() + p * d.plane();
    for (std::size_t i = 0; i < d.plane(); ++i) acc += src[i];
    out[p] = acc;
  }
  return out;
}

}  // namespace

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  Tape<T>& tape = a.tape();
  const bool broadcast = a.shape() != b.shape();
  return tape.record(rrse::add(a.value(), b.value()), {a, b},
                     [a, b, broadcast](Tape<T>& t, std::size_t self) {
                       const BasicTensor<T>& g = t.incoming(self);
                       t.accumulate(a, g);
                       t.accumulate(b, broadcast ? reduce_to_channels(g, b.shape()) : g);
                     });
}

template <typename T>
Var<T> mul(Var<T> a, Var<T> b) {
  Tape<T>& tape = a.tape();
  const bool broadcast = a.shape() != b.shape();
  return tape.record(rrse::mul(a.value(), b.value()), {a, b},
                     [a, b, broadcast](Tape<T>& t, std::size_t self) {
                       const BasicTensor<T>& g = t.incoming(self);
                       if (t.requires_grad(a)) t.accumulate(a, rrse::mul(g, b.value()));
                       if (t.requires_grad(b)) {
                         BasicTensor<T> gb(a.shape());
                         for (std::size_t i = 0; i < gb.size(); ++i) gb[i] = g[i] * a.value()[i];
                         t.accumulate(b, broadcast ? reduce_to_channels(gb, b.shape())
                                                   : std::move(gb));
                       }
                     });
}

template <typename T>
Var<T> scale(Var<T> a, T factor) {
  return a.tape().record(rrse::scale(a.value(), factor), {a},
                         [a, factor](Tape<T>& t, std::size_t self) {
                           t.accumulate(a, rrse::scale(t.incoming(self), factor));
                         });
}

template <typename T>
Var<T> conv2d(Var<T> x, Var<T> weight, Var<T> bias, std::size_t dilation,
              const std::string& name) {
  ConvParams<T> p{weight.value(), bias.value(), dilation, name};
  BasicTensor<T> y = conv2d_valid(x.value(), p);
  return x.tape().record(
      std::move(y), {x, weight, bias}, [x, weight, bias, dilation](Tape<T>& t, std::size_t self) {
        const BasicTensor<T>& g = t.incoming(self);
        if (t.requires_grad(x)) {
          t.accumulate(x, conv2d_grad_input(g, weight.value(), dilation, x.shape()));
        }
        if (t.requires_grad(weight) || t.requires_grad(bias)) {
          BasicTensor<T> dw(weight.shape());
          BasicTensor<T> db(bias.shape());
          conv2d_grad_params(x.value(), g, dilation, dw, db);
          t.accumulate(weight, std::move(dw));
          t.accumulate(bias, std::move(db));
        }
      });
}

template <typename T>
Var<T> relu(Var<T> x) {
  return x.tape().record(rrse::relu(x.value()), {x}, [x](Tape<T>& t, std::size_t self) {
    const BasicTensor<T>& g = t.incoming(self);
    BasicTensor<T> dx(g.shape());
    for (std::size_t i = 0; i < g.size(); ++i) dx[i] = x.value()[i] > T(0) ? g[i] : T(0);
    t.accumulate(x, std::move(dx));
  });
}

template <typename T>
Var<T> sigmoid(Var<T> x) {
  return x.tape().record(rrse::sigmoid(x.value()), {x}, [x](Tape<T>& t, std::size_t self) {
    const BasicTensor<T>& g = t.incoming(self);
    const BasicTensor<T>& s = t.value(self);
    BasicTensor<T> dx(g.shape());
    for (std::size_t i = 0; i < g.size(); ++i) dx[i] = g[i] * s[i] * (T(1) - s[i]);
    t.accumulate(x, std::move(dx));
  });
}

template <typename T>
Var<T> maxpool2d(Var<T> x) {
  return x.tape().record(rrse::maxpool2d(x.value()), {x}, [x](Tape<T>& t, std::size_t self) {
    t.accumulate(x, maxpool2d_grad(x.value(), t.incoming(self)));
  });
}

template <typename T>
Var<T> upsample_nearest(Var<T> x, std::size_t factor) {
  return x.tape().record(rrse::upsample_nearest(x.value(), factor), {x},
                         [x, factor](Tape<T>& t, std::size_t self) {
                           t.accumulate(x, upsample_nearest_grad(t.incoming(self), factor));
                         });
}

template <typename T>
Var<T> global_avg_pool(Var<T> x) {
  return x.tape().record(rrse::global_avg_pool(x.value()), {x}, [x](Tape<T>& t, std::size_t self) {
    const BasicTensor<T>& g = t.incoming(self);
    const Dims4 d = as_nchw(x.shape());
    BasicTensor<T> dx(x.shape());
    const T inv = T(1) / static_cast<T>(d.plane());
    for (std::size_t p = 0; p < d.n * d.c; ++p) {
      const T v = g[p] * inv;
      std::fill_n(dx.data() + p * d.plane(), d.plane(), v);
    }
    t.accumulate(x, std::move(dx));
  });
}

template <typename T>
Var<T> center_crop(Var<T> x, std::size_t height, std::size_t width) {
  const std::size_t r = x.shape().size();
  const std::size_t H = x.shape()[r - 2], W = x.shape()[r - 1];
  BasicTensor<T> y = rrse::center_crop(x.value(), height, width);
  if (height == H && width == W) {
    return x.tape().record(std::move(y), {x}, [x](Tape<T>& t, std::size_t self) {
      t.accumulate(x, t.incoming(self));
    });
  }
  const std::size_t top = (H - height) / 2, left = (W - width) / 2;
  return x.tape().record(std::move(y), {x},
                         [x, top, left, H, W](Tape<T>& t, std::size_t self) {
                           const BasicTensor<T>& g = t.incoming(self);
                           const std::size_t r = g.rank();
                           const std::size_t h = g.shape()[r - 2], w = g.shape()[r - 1];
                           BasicTensor<T> dx(x.shape());
                           const std::size_t planes = g.size() / (h * w);
                           for (std::size_t p = 0; p < planes; ++p) {
                             for (std::size_t yy = 0; yy < h; ++yy) {
                               std::copy_n(g.data() + (p * h + yy) * w, w,
                                           dx.data() + p * H * W + (top + yy) * W + left);
                             }
                           }
                           t.accumulate(x, std::move(dx));
                         });
}

template <typename T>
Var<T> batchnorm2d(Var<T> x, Var<T> gamma, Var<T> beta, BasicTensor<T>& running_mean,
                   BasicTensor<T>& running_var, Mode mode, bool update_running, double epsilon,
                   double momentum) {
  BatchNormParams<T> p{gamma.value(), beta.value(), running_mean, running_var, epsilon, momentum};
  BatchNormResult<T> fwd = batchnorm2d_forward(x.value(), p, mode, update_running);
  if (mode == Mode::train && update_running) {
    running_mean = std::move(p.running_mean);
    running_var = std::move(p.running_var);
  }
  BasicTensor<T> y = std::move(fwd.output);
  fwd.output = BasicTensor<T>();
  return x.tape().record(std::move(y), {x, gamma, beta},
                         [x, gamma, beta, fwd = std::move(fwd), mode](Tape<T>& t, std::size_t self) {
                           BatchNormGrads<T> g =
                               batchnorm2d_grad(t.incoming(self), fwd, gamma.value(), mode);
                           t.accumulate(x, std::move(g.dx));
                           t.accumulate(gamma, std::move(g.dgamma));
                           t.accumulate(beta, std::move(g.dbeta));
                         });
}

template <typename T>
Var<T> spatial_dropout(Var<T> x, double rate, Mode mode, std::uint64_t seed) {
  const Dims4 d = as_nchw(x.shape());
  std::vector<T> scales = spatial_dropout_scales<T>(d.n * d.c, rate, seed);
  if (mode == Mode::infer || rate == 0.0) {
    return x.tape().record(x.value(), {x}, [x](Tape<T>& t, std::size_t self) {
      t.accumulate(x, t.incoming(self));
    });
  }
  auto apply = [d](const BasicTensor<T>& in, const std::vector<T>& s) {
    BasicTensor<T> out = in;
    for (std::size_t p = 0; p < d.n * d.c; ++p) {
      T* dst = out.data() + p * d.plane();
      for (std::size_t i = 0; i < d.plane(); ++i) dst[i] *= s[p];
    }
    return out;
  };
  BasicTensor<T> y = apply(x.value(), scales);
  return x.tape().record(std::move(y), {x},
                         [x, apply, scales = std::move(scales)](Tape<T>& t, std::size_t self) {
                           t.accumulate(x, apply(t.incoming(self), scales));
                         });
}

template <typename T>
Var<T> softmax_cross_entropy(Var<T> logits, const LabelMap& target) {
  const Shape& s = logits.shape();
  if (s.size() != 3 && s.size() != 4) {
    throw Error("crossentropy: logits must be [K,h,w] or [N,K,h,w], got " + shape_str(s));
  }
  const Dims4 d = as_nchw(s);
  Shape expected = s.size() == 3 ? Shape{d.h, d.w} : Shape{d.n, d.h, d.w};
  if (target.shape() != expected) {
    throw Error("crossentropy: target shape " + shape_str(target.shape()) +
                " does not match logits " + shape_str(s));
  }
  for (std::uint8_t label : target.values()) {
    if (label >= d.c) {
      throw Error("crossentropy: label " + std::to_string(label) + " is not below " +
                  std::to_string(d.c) + " classes");
    }
  }
  BasicTensor<T> prob = softmax_channels(logits.value());
  const std::size_t plane = d.plane();
  const std::size_t count = d.n * plane;
  double loss = 0.0;
  for (std::size_t n = 0; n < d.n; ++n) {
    const T* lg = logits.value().data() + n * d.item();
    for (std::size_t i = 0; i < plane; ++i) {
      // log-sum-exp with max subtraction.
      T m = -std::numeric_limits<T>::infinity();
      for (std::size_t c = 0; c < d.c; ++c) m = std::max(m, lg[c * plane + i]);
      double sum = 0.0;
      for (std::size_t c = 0; c < d.c; ++c) sum += std::exp(static_cast<double>(lg[c * plane + i] - m));
      const std::size_t label = target[n * plane + i];
      loss += std::log(sum) - static_cast<double>(lg[label * plane + i] - m);
    }
  }
  loss /= static_cast<double>(count);
  return logits.tape().record(
      BasicTensor<T>({1}, std::vector<T>{static_cast<T>(loss)}), {logits},
      [logits, target, prob = std::move(prob), d, count](Tape<T>& t, std::size_t self) {
        const T g = t.incoming(self)[0] / static_cast<T>(count);
        BasicTensor<T> dx = prob;
        const std::size_t plane = d.plane();
        for (std::size_t n = 0; n < d.n; ++n) {
          for (std::size_t i = 0; i < plane; ++i) {
            dx[n * d.item() + target[n * plane + i] * plane + i] -= T(1);
          }
        }
        for (T& v : dx.values()) v *= g;
        t.accumulate(logits, std::move(dx));
      });
}

template <typename T>
Var<T> sum(Var<T> x) {
  double acc = 0.0;
  for (T v : x.value().values()) acc += v;
  return x.tape().record(BasicTensor<T>({1}, std::vector<T>{static_cast<T>(acc)}), {x},
                         [x](Tape<T>& t, std::size_t self) {
                           t.accumulate(x, BasicTensor<T>::full(x.shape(), t.incoming(self)[0]));
                         });
}

template <typename T>
Var<T> weighted_sum(Var<T> x, const BasicTensor<T>& weights) {
  if (weights.shape() != x.shape()) {
    throw Error("weighted_sum: weight shape " + shape_str(weights.shape()) +
                " does not match " + shape_str(x.shape()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += static_cast<double>(x.value()[i]) * weights[i];
  }
  return x.tape().record(BasicTensor<T>({1}, std::vector<T>{static_cast<T>(acc)}), {x},
                         [x, weights](Tape<T>& t, std::size_t self) {
                           t.accumulate(x, rrse::scale(weights, t.incoming(self)[0]));
                         });
}

#define RRSE_INSTANTIATE_AD(T)                                                                  \
  template Var<T> add(Var<T>, Var<T>);                                                         \
  template Var<T> mul(Var<T>, Var<T>);                                                         \
  template Var<T> scale(Var<T>, T);                                                            \
  template Var<T> conv2d(Var<T>, Var<T>, Var<T>, std::size_t, const std::string&);             \
  template Var<T> relu(Var<T>);                                                                \
  template Var<T> sigmoid(Var<T>);                                                             \
  template Var<T> maxpool2d(Var<T>);                                                           \
  template Var<T> upsample_nearest(Var<T>, std::size_t);                                       \
  template Var<T> global_avg_pool(Var<T>);                                                     \
  template Var<T> center_crop(Var<T>, std::size_t, std::size_t);                               \
  template Var<T> batchnorm2d(Var<T>, Var<T>, Var<T>, BasicTensor<T>&, BasicTensor<T>&, Mode,  \
                              bool, double, double);                                           \
  template Var<T> spatial_dropout(Var<T>, double, Mode, std::uint64_t);                        \
  template Var<T> softmax_cross_entropy(Var<T>, const LabelMap&);                              \
  template Var<T> sum(Var<T>);                                                                 \
  template Var<T> weighted_sum(Var<T>, const BasicTensor<T>&);

RRSE_INSTANTIATE_AD(float)
RRSE_INSTANTIATE_AD(double)
#undef RRSE_INSTANTIATE_AD

}  // namespace ad
}  // namespace rrse
