#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rrse/error.hpp"

namespace rrse {

using Shape = std::vector<std::size_t>;

// Number of elements; throws if any extent is zero.
std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

struct Shape2d {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  Shape2d(std::size_t c, std::size_t h, std::size_t w);

  std::size_t size() const noexcept { return channels * height * width; }
  std::size_t flatten(std::size_t c, std::size_t y, std::size_t x) const noexcept {
    return (c * height + y) * width + x;
  }
  struct Index {
    std::size_t c, y, x;
    bool operator==(const Index&) const = default;
  };
  Index unflatten(std::size_t index) const noexcept {
    return {index / (height * width), (index / width) % height, index % width};
  }
};

/// Batch view of a feature-map tensor. Rank 2 is [H,W], rank 3 [C,H,W] and
/// rank 4 [N,C,H,W]; missing leading axes have extent 1.
struct Dims4 {
  std::size_t n = 1, c = 1, h = 1, w = 1;
  std::size_t plane() const noexcept { return h * w; }
  std::size_t item() const noexcept { return c * h * w; }
};
Dims4 as_nchw(const Shape& shape);

/// Dense row-major array. The default-constructed tensor is a null value
/// (no shape, no data); every other tensor has positive extents and
/// size() == product(shape).
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;
  explicit BasicTensor(Shape shape, T fill = T{});
  BasicTensor(Shape shape, std::vector<T> data);

  static BasicTensor zeros(Shape shape) { return BasicTensor(std::move(shape), T(0)); }
  static BasicTensor ones(Shape shape) { return BasicTensor(std::move(shape), T(1)); }
  static BasicTensor full(Shape shape, T value) { return BasicTensor(std::move(shape), value); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  const std::vector<T>& buffer() const noexcept { return data_; }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  // Accessors over the trailing spatial axes.
  T& at(std::size_t y, std::size_t x);
  const T& at(std::size_t y, std::size_t x) const;
  T& at(std::size_t c, std::size_t y, std::size_t x);
  const T& at(std::size_t c, std::size_t y, std::size_t x) const;
  T& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x);
  const T& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const;

  BasicTensor reshaped(Shape shape) const&;
  BasicTensor reshaped(Shape shape) &&;

  template <typename U>
  BasicTensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    if (shape_.empty()) return {};
    return BasicTensor<U>(shape_, std::move(out));
  }

  bool operator==(const BasicTensor&) const = default;

 private:
  Shape shape_;
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;
using LabelMap = BasicTensor<std::uint8_t>;

/// Crops the trailing two axes to (height, width). The window starts at
/// floor((H-h)/2), floor((W-w)/2), so odd differences drop the extra
/// row/column at the bottom/right.
template <typename T>
BasicTensor<T> center_crop(const BasicTensor<T>& x, std::size_t height, std::size_t width);

template <typename T>
BasicTensor<T> crop_window(const BasicTensor<T>& x, std::size_t top, std::size_t left,
                           std::size_t height, std::size_t width);

// Elementwise arithmetic. `b` may also be a per-channel gate of shape
// [C,1,1] (or [N,C,1,1]) broadcast against a [C,H,W] (or [N,C,H,W]) `a`.
template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& a, T factor);

template <typename T>
BasicTensor<T> he_normal_init(Shape shape, std::size_t fan_in, std::uint64_t seed);

template <typename T>
T max_abs(const BasicTensor<T>& x);

/// max|a-b| / max(max|a|, max|b|, floor).
template <typename T>
double max_relative_error(const BasicTensor<T>& a, const BasicTensor<T>& b, double floor = 1e-12);

}  // namespace rrse
