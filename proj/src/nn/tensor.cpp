#include "bwe/nn/tensor.hpp"

#include <cmath>

namespace bwe::nn {

std::string shape_string(std::span<const std::int64_t> dims) {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += " x ";
    s += std::to_string(dims[i]);
  }
  return s + "]";
}

template <typename T>
bool Tensor<T>::all_finite() const {
  for (T v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

template <typename T>
void Tensor<T>::check_finite(const std::string& where) const {
  if (!all_finite()) throw NumericError("non-finite value in " + where);
}

template <typename T>
std::size_t ParameterSet<T>::add(std::string name, Tensor<T> t) {
  if (find(name) != size()) throw ShapeError("duplicate parameter name " + name);
  entries_.emplace_back(std::move(name), std::move(t));
  return entries_.size() - 1;
}

template <typename T>
std::size_t ParameterSet<T>::find(const std::string& name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].first == name) return i;
  return entries_.size();
}

template <typename T>
ParameterSet<T> ParameterSet<T>::zeros_like() const {
  ParameterSet out;
  for (const auto& [n, t] : entries_) out.entries_.emplace_back(n, Tensor<T>::zeros_like(t));
  return out;
}

template <typename T>
void ParameterSet<T>::zero() {
  for (auto& e : entries_) e.second.fill(T(0));
}

template <typename T>
std::size_t ParameterSet<T>::element_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.second.size();
  return n;
}

template <typename T>
double ParameterSet<T>::squared_norm() const {
  double acc = 0.0;
  for (const auto& e : entries_)
    for (T v : e.second.data()) acc += static_cast<double>(v) * static_cast<double>(v);
  return acc;
}

template <typename T>
void ParameterSet<T>::scale(T factor) {
  for (auto& e : entries_)
    for (T& v : e.second.data()) v *= factor;
}

template class Tensor<float>;
template class Tensor<double>;
template class ParameterSet<float>;
template class ParameterSet<double>;

}  // namespace bwe::nn
