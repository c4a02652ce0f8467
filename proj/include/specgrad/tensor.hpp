#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "specgrad/errors.hpp"

namespace specgrad {

// Dense row-major tensors of rank 1..4. Canonical 4-D layout is
// (batch, channel, rows, cols).
inline constexpr int kMaxRank = 4;

class Shape {
 public:
  Shape() = default;

  Shape(std::initializer_list<std::int64_t> dims) : Shape(std::vector<std::int64_t>(dims)) {}

  explicit Shape(std::vector<std::int64_t> dims) : dims_(std::move(dims)) {
    if (dims_.empty() || dims_.size() > kMaxRank) {
      throw DomainError("shape rank must be between 1 and 4, got " + std::to_string(dims_.size()));
    }
    for (std::int64_t d : dims_) {
      if (d < 1) {
        throw DomainError("shape dimensions must be >= 1, got " + to_string_of(dims_));
      }
    }
  }

  int rank() const { return static_cast<int>(dims_.size()); }

  std::int64_t dim(int axis) const {
    if (axis < 0 || axis >= rank()) {
      throw DomainError("axis " + std::to_string(axis) + " out of range for rank " +
                        std::to_string(rank()));
    }
    return dims_[static_cast<std::size_t>(axis)];
  }

  const std::vector<std::int64_t>& dims() const { return dims_; }

  std::int64_t numel() const {
    std::int64_t n = 1;
    for (std::int64_t d : dims_) n *= d;
    return dims_.empty() ? 0 : n;
  }

  bool operator==(const Shape& other) const { return dims_ == other.dims_; }
  bool operator!=(const Shape& other) const { return !(*this == other); }

  std::string to_string() const { return to_string_of(dims_); }

 private:
  static std::string to_string_of(const std::vector<std::int64_t>& dims) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < dims.size(); ++i) {
      if (i) os << ", ";
      os << dims[i];
    }
    os << ")";
    return os.str();
  }

  std::vector<std::int64_t> dims_;
};

template <class T>
class TensorT {
  static_assert(std::is_floating_point_v<T>);

 public:
  using value_type = T;

  // Empty placeholder; every operation rejects it.
  TensorT() = default;

  explicit TensorT(Shape shape) : shape_(std::move(shape)) {
    data_.assign(static_cast<std::size_t>(shape_.numel()), T(0));
  }

  TensorT(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (static_cast<std::int64_t>(data_.size()) != shape_.numel()) {
      throw DomainError("data length " + std::to_string(data_.size()) +
                        " does not match shape " + shape_.to_string());
    }
  }

  static TensorT zeros(Shape shape) { return TensorT(std::move(shape)); }

  static TensorT full(Shape shape, T value) {
    TensorT t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
  }

  static TensorT from_vector(std::vector<T> values) {
    Shape shape({static_cast<std::int64_t>(values.size())});
    return TensorT(std::move(shape), std::move(values));
  }

  bool empty() const { return data_.empty(); }
  const Shape& shape() const { return shape_; }
  int rank() const { return shape_.rank(); }
  std::int64_t dim(int axis) const { return shape_.dim(axis); }
  std::int64_t numel() const { return static_cast<std::int64_t>(data_.size()); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<const T> values() const { return {data_.data(), data_.size()}; }

  T& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  const T& operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

  T& operator()(std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  const T& operator()(std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

  T& operator()(std::int64_t i, std::int64_t j) {
    return data_[static_cast<std::size_t>(i * shape_.dim(1) + j)];
  }
  const T& operator()(std::int64_t i, std::int64_t j) const {
    return data_[static_cast<std::size_t>(i * shape_.dim(1) + j)];
  }

  T& operator()(std::int64_t i, std::int64_t j, std::int64_t k) {
    return data_[static_cast<std::size_t>((i * shape_.dim(1) + j) * shape_.dim(2) + k)];
  }
  const T& operator()(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return data_[static_cast<std::size_t>((i * shape_.dim(1) + j) * shape_.dim(2) + k)];
  }

  T& operator()(std::int64_t i, std::int64_t j, std::int64_t k, std::int64_t l) {
    return data_[static_cast<std::size_t>(
        ((i * shape_.dim(1) + j) * shape_.dim(2) + k) * shape_.dim(3) + l)];
  }
  const T& operator()(std::int64_t i, std::int64_t j, std::int64_t k, std::int64_t l) const {
    return data_[static_cast<std::size_t>(
        ((i * shape_.dim(1) + j) * shape_.dim(2) + k) * shape_.dim(3) + l)];
  }

  bool all_finite() const {
    for (T v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  bool operator==(const TensorT& other) const {
    return shape_ == other.shape_ && data_ == other.data_;
  }

 private:
  Shape shape_;
  std::vector<T> data_;
};

using Tensor = TensorT<float>;
using Tensor64 = TensorT<double>;

}  // namespace specgrad
