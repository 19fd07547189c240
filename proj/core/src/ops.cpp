#include "rrse/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "rrse/gemm.hpp"
#include "rrse/parallel.hpp"

namespace rrse {
namespace {

Shape with_spatial(const Shape& like, std::size_t c, std::size_t h, std::size_t w) {
  Shape out = like;
  const std::size_t r = out.size();
  out[r - 1] = w;
  out[r - 2] = h;
  if (r >= 3) out[r - 3] = c;
  return out;
}

void require_feature_map(const Shape& shape, const char* op) {
  if (shape.size() != 3 && shape.size() != 4) {
    throw Error(std::string(op) + ": expected [C,H,W] or [N,C,H,W], got " + shape_str(shape));
  }
}

template <typename T>
void check_conv(const BasicTensor<T>& x, const ConvParams<T>& p) {
  require_feature_map(x.shape(), "conv2d");
  if (p.weight.rank() != 4) {
    throw Error("conv '" + p.name + "': weight must be [C_out,C_in,k_h,k_w], got " +
                shape_str(p.weight.shape()));
  }
  if (p.bias.shape() != Shape{p.out_channels()}) {
    throw Error("conv '" + p.name + "': bias shape " + shape_str(p.bias.shape()) +
                " does not match " + std::to_string(p.out_channels()) + " output channels");
  }
  if (p.dilation == 0) throw Error("conv '" + p.name + "': dilation must be >= 1");
  const Dims4 d = as_nchw(x.shape());
  if (d.c != p.in_channels()) {
    throw Error("conv '" + p.name + "': input has " + std::to_string(d.c) +
                " channels, weights expect " + std::to_string(p.in_channels()));
  }
}

template <typename T>
void im2col(const T* x, std::size_t C, std::size_t H, std::size_t W, std::size_t kh,
            std::size_t kw, std::size_t d, std::size_t Ho, std::size_t Wo, T* col) {
  const std::size_t P = Ho * Wo;
  for (std::size_t i = 0; i < C; ++i) {
    for (std::size_t u = 0; u < kh; ++u) {
      for (std::size_t v = 0; v < kw; ++v) {
        T* dst = col + ((i * kh + u) * kw + v) * P;
        const T* src = x + i * H * W + u * d * W + v * d;
        for (std::size_t y = 0; y < Ho; ++y) std::copy_n(src + y * W, Wo, dst + y * Wo);
      }
    }
  }
}

template <typename T>
void col2im_add(const T* col, std::size_t C, std::size_t H, std::size_t W, std::size_t kh,
                std::size_t kw, std::size_t d, std::size_t Ho, std::size_t Wo, T* x) {
  const std::size_t P = Ho * Wo;
  for (std::size_t i = 0; i < C; ++i) {
    for (std::size_t u = 0; u < kh; ++u) {
      for (std::size_t v = 0; v < kw; ++v) {
        const T* src = col + ((i * kh + u) * kw + v) * P;
        T* dst = x + i * H * W + u * d * W + v * d;
        for (std::size_t y = 0; y < Ho; ++y) {
          T* row = dst + y * W;
          const T* s = src + y * Wo;
          for (std::size_t xx = 0; xx < Wo; ++xx) row[xx] += s[xx];
        }
      }
    }
  }
}

}  // namespace

template <typename T>
ConvParams<T> ConvParams<T>::make(std::size_t in_channels, std::size_t out_channels,
                                  std::size_t kernel, std::size_t dilation, std::uint64_t seed,
                                  std::string name) {
  ConvParams p;
  p.weight = he_normal_init<T>({out_channels, in_channels, kernel, kernel},
                               in_channels * kernel * kernel, seed);
  p.bias = BasicTensor<T>::zeros({out_channels});
  p.dilation = dilation;
  p.name = std::move(name);
  return p;
}

std::size_t conv_output_extent(std::size_t input, std::size_t kernel, std::size_t dilation,
                               const std::string& layer) {
  const std::size_t reach = (kernel - 1) * dilation;
  if (input <= reach) {
    throw Error("conv '" + layer + "': input extent " + std::to_string(input) +
                " is smaller than the dilated receptive field " + std::to_string(reach + 1) +
                " (kernel " + std::to_string(kernel) + ", dilation " + std::to_string(dilation) +
                ")");
  }
  return input - reach;
}

template <typename T>
BasicTensor<T> conv2d_valid(const BasicTensor<T>& x, const ConvParams<T>& p) {
  check_conv(x, p);
  const Dims4 d = as_nchw(x.shape());
  const std::size_t kh = p.kernel_h(), kw = p.kernel_w(), dil = p.dilation;
  const std::size_t Ho = conv_output_extent(d.h, kh, dil, p.name);
  const std::size_t Wo = conv_output_extent(d.w, kw, dil, p.name);
  const std::size_t Co = p.out_channels();
  const std::size_t K = d.c * kh * kw;
  const std::size_t P = Ho * Wo;
  BasicTensor<T> out(with_spatial(x.shape(), Co, Ho, Wo));
  const bool pointwise = kh == 1 && kw == 1;

  parallel_for(d.n, [&](std::size_t n) {
    const T* xin = x.data() + n * d.item();
    std::vector<T> col;
    const T* colp = xin;
    if (!pointwise) {
      col.resize(K * P);
      im2col(xin, d.c, d.h, d.w, kh, kw, dil, Ho, Wo, col.data());
      colp = col.data();
    }
    T* y = out.data() + n * Co * P;
    gemm_nn(Co, P, K, p.weight.data(), K, colp, P, y, P, false);
    for (std::size_t o = 0; o < Co; ++o) {
      const T b = p.bias[o];
      T* row = y + o * P;
      for (std::size_t i = 0; i < P; ++i) row[i] += b;
    }
  });
  return out;
}

template <typename T>
BasicTensor<T> conv2d_valid_naive(const BasicTensor<T>& x, const ConvParams<T>& p) {
  check_conv(x, p);
  const Dims4 d = as_nchw(x.shape());
  const std::size_t kh = p.kernel_h(), kw = p.kernel_w(), dil = p.dilation;
  const std::size_t Ho = conv_output_extent(d.h, kh, dil, p.name);
  const std::size_t Wo = conv_output_extent(d.w, kw, dil, p.name);
  const std::size_t Co = p.out_channels();
  BasicTensor<T> out(with_spatial(x.shape(), Co, Ho, Wo));
  for (std::size_t n = 0; n < d.n; ++n) {
    for (std::size_t o = 0; o < Co; ++o) {
      for (std::size_t y = 0; y < Ho; ++y) {
        for (std::size_t xx = 0; xx < Wo; ++xx) {
          double acc = static_cast<double>(p.bias[o]);
          for (std::size_t i = 0; i < d.c; ++i) {
            for (std::size_t u = 0; u < kh; ++u) {
              for (std::size_t v = 0; v < kw; ++v) {
                const double w = p.weight[((o * d.c + i) * kh + u) * kw + v];
                const double in =
                    x[((n * d.c + i) * d.h + y + u * dil) * d.w + xx + v * dil];
                acc += w * in;
              }
            }
          }
          out[((n * Co + o) * Ho + y) * Wo + xx] = static_cast<T>(acc);
        }
      }
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> conv1x1(const BasicTensor<T>& x, const ConvParams<T>& p) {
  if (p.weight.rank() != 4 || p.kernel_h() != 1 || p.kernel_w() != 1) {
    throw Error("conv1x1 '" + p.name + "': kernel must be 1x1, weight shape " +
                shape_str(p.weight.shape()));
  }
  return conv2d_valid(x, p);
}

template <typename T>
BasicTensor<T> conv2d_grad_input(const BasicTensor<T>& dy, const BasicTensor<T>& weight,
                                 std::size_t dilation, const Shape& input_shape) {
  const Dims4 d = as_nchw(input_shape);
  const Dims4 g = as_nchw(dy.shape());
  const std::size_t Co = weight.dim(0), kh = weight.dim(2), kw = weight.dim(3);
  const std::size_t K = d.c * kh * kw;
  const std::size_t P = g.h * g.w;
  BasicTensor<T> dx(input_shape);
  const bool pointwise = kh == 1 && kw == 1;
  parallel_for(d.n, [&](std::size_t n) {
    const T* gy = dy.data() + n * Co * P;
    T* gx = dx.data() + n * d.item();
    if (pointwise) {
      gemm_tn(d.c, P, Co, weight.data(), K, gy, P, gx, P, false);
      return;
    }
    std::vector<T> col(K * P);
    gemm_tn(K, P, Co, weight.data(), K, gy, P, col.data(), P, false);
    col2im_add(col.data(), d.c, d.h, d.w, kh, kw, dilation, g.h, g.w, gx);
  });
  return dx;
}

template <typename T>
void conv2d_grad_params(const BasicTensor<T>& x, const BasicTensor<T>& dy, std::size_t dilation,
                        BasicTensor<T>& dweight, BasicTensor<T>& dbias) {
  const Dims4 d = as_nchw(x.shape());
  const Dims4 g = as_nchw(dy.shape());
  const std::size_t Co = dweight.dim(0), kh = dweight.dim(2), kw = dweight.dim(3);
  const std::size_t K = d.c * kh * kw;
  const std::size_t P = g.h * g.w;
  const bool pointwise = kh == 1 && kw == 1;

  // Per-item partial sums, reduced in item order for reproducibility.
  std::vector<std::vector<T>> partial(d.n, std::vector<T>(Co * K));
  parallel_for(d.n, [&](std::size_t n) {
    const T* xin = x.data() + n * d.item();
    std::vector<T> col;
    const T* colp = xin;
    if (!pointwise) {
      col.resize(K * P);
      im2col(xin, d.c, d.h, d.w, kh, kw, dilation, g.h, g.w, col.data());
      colp = col.data();
    }
    gemm_nt(Co, K, P, dy.data() + n * Co * P, P, colp, P, partial[n].data(), K, false);
  });
  std::fill(dweight.values().begin(), dweight.values().end(), T(0));
  for (const auto& part : partial) {
    for (std::size_t i = 0; i < part.size(); ++i) dweight[i] += part[i];
  }
  std::fill(dbias.values().begin(), dbias.values().end(), T(0));
  for (std::size_t n = 0; n < g.n; ++n) {
    for (std::size_t o = 0; o < Co; ++o) {
      const T* row = dy.data() + (n * Co + o) * P;
      T acc = 0;
      for (std::size_t i = 0; i < P; ++i) acc += row[i];
      dbias[o] += acc;
    }
  }
}

template <typename T>
BasicTensor<T> maxpool2d(const BasicTensor<T>& x) {
  require_feature_map(x.shape(), "maxpool2d");
  const Dims4 d = as_nchw(x.shape());
  if (d.h < 2 || d.w < 2) {
    throw Error("maxpool2d: input " + std::to_string(d.h) + "x" + std::to_string(d.w) +
                " is smaller than the 2x2 window");
  }
  const std::size_t Ho = d.h / 2, Wo = d.w / 2;
  BasicTensor<T> out(with_spatial(x.shape(), d.c, Ho, Wo));
  for (std::size_t p = 0; p < d.n * d.c; ++p) {
    const T* src = x.data() + p * d.plane();
    T* dst = out.data() + p * Ho * Wo;
    for (std::size_t y = 0; y < Ho; ++y) {
      const T* r0 = src + 2 * y * d.w;
      const T* r1 = r0 + d.w;
      for (std::size_t xx = 0; xx < Wo; ++xx) {
        dst[y * Wo + xx] = std::max(std::max(r0[2 * xx], r0[2 * xx + 1]),
                                    std::max(r1[2 * xx], r1[2 * xx + 1]));
      }
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> maxpool2d_grad(const BasicTensor<T>& x, const BasicTensor<T>& dy) {
  const Dims4 d = as_nchw(x.shape());
  const std::size_t Ho = d.h / 2, Wo = d.w / 2;
  BasicTensor<T> dx(x.shape());
  for (std::size_t p = 0; p < d.n * d.c; ++p) {
    const T* src = x.data() + p * d.plane();
    const T* g = dy.data() + p * Ho * Wo;
    T* dst = dx.data() + p * d.plane();
    for (std::size_t y = 0; y < Ho; ++y) {
      for (std::size_t xx = 0; xx < Wo; ++xx) {
        std::size_t best = (2 * y) * d.w + 2 * xx;
        const std::size_t candidates[3] = {best + 1, best + d.w, best + d.w + 1};
        for (std::size_t c : candidates) {
          if (src[c] > src[best]) best = c;
        }
        dst[best] += g[y * Wo + xx];
      }
    }
  }
  return dx;
}

template <typename T>
BasicTensor<T> upsample_nearest(const BasicTensor<T>& x, std::size_t factor) {
  require_feature_map(x.shape(), "upsample_nearest");
  if (factor == 0) throw Error("upsample_nearest: factor must be >= 1");
  if (factor == 1) return x;
  const Dims4 d = as_nchw(x.shape());
  const std::size_t Ho = d.h * factor, Wo = d.w * factor;
  BasicTensor<T> out(with_spatial(x.shape(), d.c, Ho, Wo));
  for (std::size_t p = 0; p < d.n * d.c; ++p) {
    const T* src = x.data() + p * d.plane();
    T* dst = out.data() + p * Ho * Wo;
    for (std::size_t y = 0; y < Ho; ++y) {
      const T* row = src + (y / factor) * d.w;
      for (std::size_t xx = 0; xx < Wo; ++xx) dst[y * Wo + xx] = row[xx / factor];
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> upsample_nearest_grad(const BasicTensor<T>& dy, std::size_t factor) {
  if (factor == 1) return dy;
  const Dims4 g = as_nchw(dy.shape());
  const std::size_t H = g.h / factor, W = g.w / factor;
  BasicTensor<T> dx(with_spatial(dy.shape(), g.c, H, W));
  for (std::size_t p = 0; p < g.n * g.c; ++p) {
    const T* src = dy.data() + p * g.plane();
    T* dst = dx.data() + p * H * W;
    for (std::size_t y = 0; y < g.h; ++y) {
      for (std::size_t xx = 0; xx < g.w; ++xx) dst[(y / factor) * W + xx / factor] += src[y * g.w + xx];
    }
  }
  return dx;
}

template <typename T>
BasicTensor<T> global_avg_pool(const BasicTensor<T>& x) {
  require_feature_map(x.shape(), "global_avg_pool");
  const Dims4 d = as_nchw(x.shape());
  BasicTensor<T> out(with_spatial(x.shape(), d.c, 1, 1));
  for (std::size_t p = 0; p < d.n * d.c; ++p) {
    const T* src = x.data() + p * d.plane();
    double acc = 0.0;
    for (std::size_t i = 0; i < d.plane(); ++i) acc += src[i];
    out[p] = static_cast<T>(acc / static_cast<double>(d.plane()));
  }
  return out;
}

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& x) {
  BasicTensor<T> out = x;
  for (T& v : out.values()) v = v > T(0) ? v : T(0);
  return out;
}

template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& x) {
  BasicTensor<T> out = x;
  for (T& v : out.values()) {
    // Split by sign so exp never overflows.
    if (v >= T(0)) {
      v = T(1) / (T(1) + std::exp(-v));
    } else {
      const T e = std::exp(v);
      v = e / (T(1) + e);
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> softmax_channels(const BasicTensor<T>& x) {
  require_feature_map(x.shape(), "softmax_channels");
  const Dims4 d = as_nchw(x.shape());
  BasicTensor<T> out(x.shape());
  const std::size_t plane = d.plane();
  for (std::size_t n = 0; n < d.n; ++n) {
    const T* src = x.data() + n * d.item();
    T* dst = out.data() + n * d.item();
    for (std::size_t i = 0; i < plane; ++i) {
      T m = -std::numeric_limits<T>::infinity();
      for (std::size_t c = 0; c < d.c; ++c) m = std::max(m, src[c * plane + i]);
      T sum = 0;
      for (std::size_t c = 0; c < d.c; ++c) {
        const T e = std::exp(src[c * plane + i] - m);
        dst[c * plane + i] = e;
        sum += e;
      }
      for (std::size_t c = 0; c < d.c; ++c) dst[c * plane + i] /= sum;
    }
  }
  return out;
}

template <typename T>
BatchNormParams<T> BatchNormParams<T>::make(std::size_t channels) {
  BatchNormParams p;
  p.gamma = BasicTensor<T>::ones({channels});
  p.beta = BasicTensor<T>::zeros({channels});
  p.running_mean = BasicTensor<T>::zeros({channels});
  p.running_var = BasicTensor<T>::ones({channels});
  return p;
}

template <typename T>
BatchNormResult<T> batchnorm2d_forward(const BasicTensor<T>& x, BatchNormParams<T>& p, Mode mode,
                                       bool update_running) {
  require_feature_map(x.shape(), "batchnorm2d");
  const Dims4 d = as_nchw(x.shape());
  if (p.gamma.size() != d.c || p.beta.size() != d.c || p.running_mean.size() != d.c ||
      p.running_var.size() != d.c) {
    throw Error("batchnorm2d: parameters do not match " + std::to_string(d.c) + " channels");
  }
  const std::size_t plane = d.plane();
  const std::size_t m = d.n * plane;
  if (mode == Mode::train && m < 2) {
    throw Error("batchnorm2d: train mode needs at least 2 values per channel, got " +
                std::to_string(m));
  }
  BatchNormResult<T> r{BasicTensor<T>(x.shape()), BasicTensor<T>(x.shape()),
                       std::vector<T>(d.c)};
  for (std::size_t c = 0; c < d.c; ++c) {
    double mean = 0.0, var = 0.0;
    if (mode == Mode::train) {
      for (std::size_t n = 0; n < d.n; ++n) {
        const T* src = x.data() + n * d.item() + c * plane;
        for (std::size_t i = 0; i < plane; ++i) mean += src[i];
      }
      mean /= static_cast<double>(m);
      for (std::size_t n = 0; n < d.n; ++n) {
        const T* src = x.data() + n * d.item() + c * plane;
        for (std::size_t i = 0; i < plane; ++i) {
          const double dv = src[i] - mean;
          var += dv * dv;
        }
      }
      const double biased = var / static_cast<double>(m);
      if (update_running) {
        const double unbiased = var / static_cast<double>(m - 1);
        p.running_mean[c] =
            static_cast<T>(p.momentum * p.running_mean[c] + (1.0 - p.momentum) * mean);
        p.running_var[c] =
            static_cast<T>(p.momentum * p.running_var[c] + (1.0 - p.momentum) * unbiased);
      }
      var = biased;
    } else {
      mean = p.running_mean[c];
      var = p.running_var[c];
    }
    const T inv_std = static_cast<T>(1.0 / std::sqrt(var + p.epsilon));
    r.inv_std[c] = inv_std;
    const T mu = static_cast<T>(mean);
    const T g = p.gamma[c], b = p.beta[c];
    for (std::size_t n = 0; n < d.n; ++n) {
      const std::size_t base = n * d.item() + c * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        const T xh = (x[base + i] - mu) * inv_std;
        r.normalized[base + i] = xh;
        r.output[base + i] = g * xh + b;
      }
    }
  }
  return r;
}

template <typename T>
BasicTensor<T> batchnorm2d(const BasicTensor<T>& x, BatchNormParams<T>& p, Mode mode) {
  return batchnorm2d_forward(x, p, mode, true).output;
}

template <typename T>
BatchNormGrads<T> batchnorm2d_grad(const BasicTensor<T>& dy, const BatchNormResult<T>& fwd,
                                   const BasicTensor<T>& gamma, Mode mode) {
  const Dims4 d = as_nchw(dy.shape());
  const std::size_t plane = d.plane();
  const double m = static_cast<double>(d.n * plane);
  BatchNormGrads<T> g{BasicTensor<T>(dy.shape()), BasicTensor<T>({d.c}), BasicTensor<T>({d.c})};
  for (std::size_t c = 0; c < d.c; ++c) {
    double sum_dy = 0.0, sum_dy_xh = 0.0;
    for (std::size_t n = 0; n < d.n; ++n) {
      const std::size_t base = n * d.item() + c * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        sum_dy += dy[base + i];
        sum_dy_xh += static_cast<double>(dy[base + i]) * fwd.normalized[base + i];
      }
    }
    g.dbeta[c] = static_cast<T>(sum_dy);
    g.dgamma[c] = static_cast<T>(sum_dy_xh);
    const double k = static_cast<double>(gamma[c]) * fwd.inv_std[c];
    for (std::size_t n = 0; n < d.n; ++n) {
      const std::size_t base = n * d.item() + c * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        if (mode == Mode::train) {
          g.dx[base + i] = static_cast<T>(
              k * (dy[base + i] - sum_dy / m - fwd.normalized[base + i] * sum_dy_xh / m));
        } else {
          g.dx[base + i] = static_cast<T>(k * dy[base + i]);
        }
      }
    }
  }
  return g;
}

template <typename T>
std::vector<T> spatial_dropout_scales(std::size_t channels, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw Error("spatial_dropout: rate must be in [0,1), got " + std::to_string(rate));
  }
  std::vector<T> scales(channels, T(1));
  if (rate == 0.0) return scales;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const T keep = static_cast<T>(1.0 / (1.0 - rate));
  for (T& s : scales) s = uniform(rng) < rate ? T(0) : keep;
  return scales;
}

template <typename T>
BasicTensor<T> spatial_dropout(const BasicTensor<T>& x, double rate, Mode mode,
                               std::uint64_t seed) {
  require_feature_map(x.shape(), "spatial_dropout");
  const Dims4 d = as_nchw(x.shape());
  const std::vector<T> scales = spatial_dropout_scales<T>(d.n * d.c, rate, seed);
  if (mode == Mode::infer || rate == 0.0) return x;
  BasicTensor<T> out = x;
  for (std::size_t p = 0; p < d.n * d.c; ++p) {
    T* dst = out.data() + p * d.plane();
    for (std::size_t i = 0; i < d.plane(); ++i) dst[i] *= scales[p];
  }
  return out;
}

#define RRSE_INSTANTIATE_OPS(T)                                                                 \
  template struct ConvParams<T>;                                                               \
  template struct BatchNormParams<T>;                                                          \
  template BasicTensor<T> conv2d_valid(const BasicTensor<T>&, const ConvParams<T>&);           \
  template BasicTensor<T> conv2d_valid_naive(const BasicTensor<T>&, const ConvParams<T>&);     \
  template BasicTensor<T> conv1x1(const BasicTensor<T>&, const ConvParams<T>&);                \
  template BasicTensor<T> conv2d_grad_input(const BasicTensor<T>&, const BasicTensor<T>&,      \
                                            std::size_t, const Shape&);                        \
  template void conv2d_grad_params(const BasicTensor<T>&, const BasicTensor<T>&, std::size_t,  \
                                   BasicTensor<T>&, BasicTensor<T>&);                          \
  template BasicTensor<T> maxpool2d(const BasicTensor<T>&);                                    \
  template BasicTensor<T> maxpool2d_grad(const BasicTensor<T>&, const BasicTensor<T>&);        \
  template BasicTensor<T> upsample_nearest(const BasicTensor<T>&, std::size_t);                \
  template BasicTensor<T> upsample_nearest_grad(const BasicTensor<T>&, std::size_t);           \
  template BasicTensor<T> global_avg_pool(const BasicTensor<T>&);                              \
  template BasicTensor<T> relu(const BasicTensor<T>&);                                         \
  template BasicTensor<T> sigmoid(const BasicTensor<T>&);                                      \
  template BasicTensor<T> softmax_channels(const BasicTensor<T>&);                             \
  template BatchNormResult<T> batchnorm2d_forward(const BasicTensor<T>&, BatchNormParams<T>&,  \
                                                  Mode, bool);                                 \
  template BasicTensor<T> batchnorm2d(const BasicTensor<T>&, BatchNormParams<T>&, Mode);       \
  template BatchNormGrads<T> batchnorm2d_grad(const BasicTensor<T>&, const BatchNormResult<T>&, \
                                              const BasicTensor<T>&, Mode);                    \
  template std::vector<T> spatial_dropout_scales<T>(std::size_t, double, std::uint64_t);       \
  template BasicTensor<T> spatial_dropout(const BasicTensor<T>&, double, Mode, std::uint64_t);

RRSE_INSTANTIATE_OPS(float)
RRSE_INSTANTIATE_OPS(double)
#undef RRSE_INSTANTIATE_OPS

}  // namespace rrse
