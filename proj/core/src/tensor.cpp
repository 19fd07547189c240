#include "rrse/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace rrse {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t extent : shape) {
    if (extent == 0) throw Error("tensor shape " + shape_str(shape) + " has a zero extent");
    n *= extent;
  }
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) out << (i ? "," : "") << shape[i];
  out << ']';
  return out.str();
}

Shape2d::Shape2d(std::size_t c, std::size_t h, std::size_t w) : channels(c), height(h), width(w) {
  if (c == 0 || h == 0 || w == 0) throw Error("Shape2d extents must be positive");
}

Dims4 as_nchw(const Shape& shape) {
  switch (shape.size()) {
    case 2: return {1, 1, shape[0], shape[1]};
    case 3: return {1, shape[0], shape[1], shape[2]};
    case 4: return {shape[0], shape[1], shape[2], shape[3]};
    default: throw Error("expected a rank 2-4 feature map, got shape " + shape_str(shape));
  }
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, T fill)
    : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {
  if (shape_.empty()) throw Error("tensor shape must have at least one axis");
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, std::vector<T> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_.empty()) throw Error("tensor shape must have at least one axis");
  if (shape_numel(shape_) != data_.size()) {
    throw Error("tensor shape " + shape_str(shape_) + " does not match buffer of " +
                std::to_string(data_.size()) + " elements");
  }
}

template <typename T>
std::size_t BasicTensor<T>::dim(std::size_t axis) const {
  if (axis >= shape_.size()) throw Error("axis out of range for shape " + shape_str(shape_));
  return shape_[axis];
}

template <typename T>
T& BasicTensor<T>::at(std::size_t y, std::size_t x) {
  return data_[y * shape_.back() + x];
}
template <typename T>
const T& BasicTensor<T>::at(std::size_t y, std::size_t x) const {
  return data_[y * shape_.back() + x];
}
template <typename T>
T& BasicTensor<T>::at(std::size_t c, std::size_t y, std::size_t x) {
  const std::size_t r = shape_.size();
  return data_[(c * shape_[r - 2] + y) * shape_[r - 1] + x];
}
template <typename T>
const T& BasicTensor<T>::at(std::size_t c, std::size_t y, std::size_t x) const {
  const std::size_t r = shape_.size();
  return data_[(c * shape_[r - 2] + y) * shape_[r - 1] + x];
}
template <typename T>
T& BasicTensor<T>::at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) {
  return data_[((n * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
}
template <typename T>
const T& BasicTensor<T>::at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
  return data_[((n * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
}

template <typename T>
BasicTensor<T> BasicTensor<T>::reshaped(Shape shape) const& {
  return BasicTensor(std::move(shape), data_);
}
template <typename T>
BasicTensor<T> BasicTensor<T>::reshaped(Shape shape) && {
  return BasicTensor(std::move(shape), std::move(data_));
}

template class BasicTensor<float>;
template class BasicTensor<double>;
template class BasicTensor<std::uint8_t>;

template <typename T>
BasicTensor<T> crop_window(const BasicTensor<T>& x, std::size_t top, std::size_t left,
                           std::size_t height, std::size_t width) {
  if (x.rank() < 2) throw Error("crop needs at least two axes, got " + shape_str(x.shape()));
  const std::size_t r = x.rank();
  const std::size_t H = x.shape()[r - 2], W = x.shape()[r - 1];
  if (height == 0 || width == 0 || top + height > H || left + width > W) {
    throw Error("crop window " + std::to_string(height) + "x" + std::to_string(width) + " at (" +
                std::to_string(top) + "," + std::to_string(left) + ") exceeds map " +
                std::to_string(H) + "x" + std::to_string(W));
  }
  Shape out_shape = x.shape();
  out_shape[r - 2] = height;
  out_shape[r - 1] = width;
  BasicTensor<T> out(out_shape);
  const std::size_t planes = x.size() / (H * W);
  for (std::size_t p = 0; p < planes; ++p) {
    const T* src = x.data() + p * H * W;
    T* dst = out.data() + p * height * width;
    for (std::size_t y = 0; y < height; ++y) {
      std::copy_n(src + (top + y) * W + left, width, dst + y * width);
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> center_crop(const BasicTensor<T>& x, std::size_t height, std::size_t width) {
  if (x.rank() < 2) throw Error("crop needs at least two axes, got " + shape_str(x.shape()));
  const std::size_t r = x.rank();
  const std::size_t H = x.shape()[r - 2], W = x.shape()[r - 1];
  if (height > H || width > W) {
    throw Error("center_crop target " + std::to_string(height) + "x" + std::to_string(width) +
                " is larger than source " + std::to_string(H) + "x" + std::to_string(W));
  }
  if (height == H && width == W) return x;
  return crop_window(x, (H - height) / 2, (W - width) / 2, height, width);
}

namespace {

enum class Broadcast { same, channel };

Broadcast check_binary(const Shape& a, const Shape& b, const char* op) {
  if (a == b) return Broadcast::same;
  if (a.size() == b.size() && a.size() >= 3) {
    const std::size_t r = a.size();
    bool channel = b[r - 1] == 1 && b[r - 2] == 1;
    for (std::size_t i = 0; i + 2 < r; ++i) channel = channel && a[i] == b[i];
    if (channel) return Broadcast::channel;
  }
  throw Error(std::string(op) + ": incompatible shapes " + shape_str(a) + " and " + shape_str(b));
}

template <typename T, typename Fn>
BasicTensor<T> binary(const BasicTensor<T>& a, const BasicTensor<T>& b, const char* op, Fn fn) {
  const Broadcast mode = check_binary(a.shape(), b.shape(), op);
  BasicTensor<T> out(a.shape());
  if (mode == Broadcast::same) {
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = fn(a[i], b[i]);
  } else {
    const Dims4 d = as_nchw(a.shape());
    const std::size_t plane = d.plane();
    for (std::size_t p = 0; p < d.n * d.c; ++p) {
      const T g = b[p];
      for (std::size_t i = 0; i < plane; ++i) out[p * plane + i] = fn(a[p * plane + i], g);
    }
  }
  return out;
}

}  // namespace

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  return binary(a, b, "add", [](T x, T y) { return x + y; });
}

template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  return binary(a, b, "mul", [](T x, T y) { return x * y; });
}

template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& a, T factor) {
  BasicTensor<T> out = a;
  for (T& v : out.values()) v *= factor;
  return out;
}

template <typename T>
BasicTensor<T> he_normal_init(Shape shape, std::size_t fan_in, std::uint64_t seed) {
  if (fan_in == 0) throw Error("he_normal_init: fan_in must be >= 1");
  BasicTensor<T> out(std::move(shape));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  for (T& v : out.values()) v = static_cast<T>(normal(rng));
  return out;
}

template <typename T>
T max_abs(const BasicTensor<T>& x) {
  T m = 0;
  for (T v : x.values()) m = std::max(m, static_cast<T>(std::abs(v)));
  return m;
}

template <typename T>
double max_relative_error(const BasicTensor<T>& a, const BasicTensor<T>& b, double floor) {
  if (a.shape() != b.shape()) {
    throw Error("max_relative_error: shapes " + shape_str(a.shape()) + " and " +
                shape_str(b.shape()) + " differ");
  }
  double diff = 0.0;
  double scale_ref = floor;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = static_cast<double>(a[i]);
    const double y = static_cast<double>(b[i]);
    diff = std::max(diff, std::abs(x - y));
    scale_ref = std::max({scale_ref, std::abs(x), std::abs(y)});
  }
  return diff / scale_ref;
}

#define RRSE_INSTANTIATE_FLOATING(T)                                                         \
  template BasicTensor<T> crop_window(const BasicTensor<T>&, std::size_t, std::size_t,        \
                                      std::size_t, std::size_t);                              \
  template BasicTensor<T> center_crop(const BasicTensor<T>&, std::size_t, std::size_t);       \
  template BasicTensor<T> add(const BasicTensor<T>&, const BasicTensor<T>&);                  \
  template BasicTensor<T> mul(const BasicTensor<T>&, const BasicTensor<T>&);                  \
  template BasicTensor<T> scale(const BasicTensor<T>&, T);                                    \
  template BasicTensor<T> he_normal_init<T>(Shape, std::size_t, std::uint64_t);               \
  template T max_abs(const BasicTensor<T>&);                                                  \
  template double max_relative_error(const BasicTensor<T>&, const BasicTensor<T>&, double);

RRSE_INSTANTIATE_FLOATING(float)
RRSE_INSTANTIATE_FLOATING(double)
#undef RRSE_INSTANTIATE_FLOATING

template BasicTensor<std::uint8_t> crop_window(const BasicTensor<std::uint8_t>&, std::size_t,
                                               std::size_t, std::size_t, std::size_t);
template BasicTensor<std::uint8_t> center_crop(const BasicTensor<std::uint8_t>&, std::size_t,
                                               std::size_t);

}  // namespace rrse
