#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace asmlp {

using Shape = std::vector<std::size_t>;

/// Thrown when operand shapes violate an operation's contract.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an operation produces NaN or Inf from finite inputs.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string shape_str(const Shape& dims) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) os << ',';
    os << dims[i];
  }
  os << ']';
  return os.str();
}

inline std::size_t shape_numel(const Shape& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

/// Dense row-major array. A "meta" tensor carries dims but no storage; every
/// operation propagates shapes (and MAC counts) through meta tensors without
/// doing arithmetic.
template <std::floating_point T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  explicit Tensor(Shape dims, T fill = T(0)) : dims_(std::move(dims)) {
    validate_dims();
    data_.assign(shape_numel(dims_), fill);
  }

  Tensor(Shape dims, std::vector<T> values) : dims_(std::move(dims)), data_(std::move(values)) {
    validate_dims();
    if (data_.size() != shape_numel(dims_)) {
      throw ShapeError("tensor: " + std::to_string(data_.size()) + " values do not fill shape " +
                       shape_str(dims_));
    }
  }

  static Tensor meta(Shape dims) {
    Tensor t;
    t.dims_ = std::move(dims);
    t.validate_dims();
    t.meta_ = true;
    return t;
  }

  static Tensor scalar(T v) { return Tensor(Shape{1}, std::vector<T>{v}); }

  const Shape& dims() const noexcept { return dims_; }
  std::size_t dim(std::size_t axis) const { return dims_.at(axis); }
  std::size_t rank() const noexcept { return dims_.size(); }
  std::size_t numel() const noexcept { return dims_.empty() ? 0 : shape_numel(dims_); }
  bool is_meta() const noexcept { return meta_; }
  bool empty() const noexcept { return dims_.empty(); }

  bool requires_grad() const noexcept { return requires_grad_; }
  void set_requires_grad(bool on) noexcept { requires_grad_ = on; }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  T* raw() noexcept { return data_.data(); }
  const T* raw() const noexcept { return data_.data(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::size_t offset(std::initializer_list<std::size_t> idx) const {
    if (idx.size() != dims_.size()) {
      throw ShapeError("tensor: index rank " + std::to_string(idx.size()) + " vs shape " +
                       shape_str(dims_));
    }
    std::size_t off = 0;
    std::size_t axis = 0;
    for (std::size_t i : idx) {
      if (i >= dims_[axis]) throw std::out_of_range("tensor: index out of range");
      off = off * dims_[axis] + i;
      ++axis;
    }
    return off;
  }
  T& at(std::initializer_list<std::size_t> idx) { return data_.at(offset(idx)); }
  const T& at(std::initializer_list<std::size_t> idx) const { return data_.at(offset(idx)); }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  Tensor reshaped(Shape dims) const {
    if (shape_numel(dims) != numel()) {
      throw ShapeError("reshape: " + shape_str(dims_) + " -> " + shape_str(dims));
    }
    Tensor out = *this;
    out.dims_ = std::move(dims);
    return out;
  }

  template <std::floating_point U>
  Tensor<U> cast() const {
    if (meta_) return Tensor<U>::meta(dims_);
    std::vector<U> v(data_.begin(), data_.end());
    Tensor<U> out(dims_, std::move(v));
    out.set_requires_grad(requires_grad_);
    return out;
  }

  /// Exact equality of dims and every element.
  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.dims_ == b.dims_ && a.meta_ == b.meta_ && a.data_ == b.data_;
  }

 private:
  void validate_dims() const {
    for (std::size_t d : dims_) {
      if (d == 0) throw ShapeError("tensor: zero-length axis in " + shape_str(dims_));
    }
  }

  Shape dims_;
  std::vector<T> data_;
  bool meta_ = false;
  bool requires_grad_ = false;
};

/// Largest absolute elementwise difference; shapes must agree.
template <std::floating_point T>
T max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.dims() != b.dims()) {
    throw ShapeError("max_abs_diff: " + shape_str(a.dims()) + " vs " + shape_str(b.dims()));
  }
  T m = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace asmlp
