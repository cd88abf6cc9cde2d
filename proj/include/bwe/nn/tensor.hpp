#pragma once

#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "bwe/error.hpp"

namespace bwe::nn {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<Mat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const Mat<T>>;
template <typename T>
using RowVec = Eigen::Matrix<T, 1, Eigen::Dynamic>;

std::string shape_string(std::span<const std::int64_t> dims);

// Dense row-major tensor of rank 1-3.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::int64_t> dims) : dims_(std::move(dims)) {
    if (dims_.empty() || dims_.size() > 3)
      throw ShapeError("tensor rank must be 1-3, got " + std::to_string(dims_.size()));
    for (auto d : dims_)
      if (d < 0) throw ShapeError("negative tensor dimension");
    data_.assign(static_cast<std::size_t>(count(dims_)), T(0));
  }
  Tensor(std::vector<std::int64_t> dims, std::vector<T> data) : Tensor(std::move(dims)) {
    if (data.size() != data_.size())
      throw ShapeError("tensor data length " + std::to_string(data.size()) +
                       " does not match shape " + shape_string(dims_));
    data_ = std::move(data);
  }

  static Tensor zeros_like(const Tensor& other) { return Tensor(other.dims_); }

  const std::vector<std::int64_t>& dims() const { return dims_; }
  std::size_t rank() const { return dims_.size(); }
  std::size_t size() const { return data_.size(); }
  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  // Rank-2 view; a rank-1 tensor is viewed as a single row.
  std::int64_t rows() const { return rank() == 1 ? 1 : dims_[0]; }
  std::int64_t cols() const {
    return rank() == 1 ? dims_[0] : count(dims_) / dims_[0];
  }
  MatMap<T> matrix() { return MatMap<T>(data_.data(), rows(), cols()); }
  ConstMatMap<T> matrix() const { return ConstMatMap<T>(data_.data(), rows(), cols()); }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }
  bool all_finite() const;
  // Throws NumericError naming `where` if any element is NaN or Inf.
  void check_finite(const std::string& where) const;

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(dims_);
    for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
    return out;
  }

 private:
  static std::int64_t count(const std::vector<std::int64_t>& d) {
    return std::accumulate(d.begin(), d.end(), std::int64_t{1}, std::multiplies<>());
  }

  std::vector<std::int64_t> dims_;
  std::vector<T> data_;
};

// Ordered collection of named tensors. Model parameters, their gradients
// and optimizer moments all share this layout, so an index into one set
// addresses the matching tensor in the others.
template <typename T>
class ParameterSet {
 public:
  std::size_t add(std::string name, Tensor<T> t);

  std::size_t size() const { return entries_.size(); }
  Tensor<T>& operator[](std::size_t i) { return entries_[i].second; }
  const Tensor<T>& operator[](std::size_t i) const { return entries_[i].second; }
  const std::string& name(std::size_t i) const { return entries_[i].first; }
  // Index of `name`, or size() when absent.
  std::size_t find(const std::string& name) const;

  ParameterSet zeros_like() const;
  void zero();
  std::size_t element_count() const;
  double squared_norm() const;
  void scale(T factor);

  template <typename U>
  ParameterSet<U> cast() const {
    ParameterSet<U> out;
    for (const auto& [n, t] : entries_) out.add(n, t.template cast<U>());
    return out;
  }

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::vector<std::pair<std::string, Tensor<T>>> entries_;
};

extern template class Tensor<float>;
extern template class Tensor<double>;
extern template class ParameterSet<float>;
extern template class ParameterSet<double>;

}  // namespace bwe::nn
