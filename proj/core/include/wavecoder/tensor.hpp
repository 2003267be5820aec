#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wavecoder {

using Complex = std::complex<double>;

/// Dense row-major tensor with a dynamic shape.
template <typename T>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s, T fill = T{})
      : shape(std::move(s)), data(count(shape), fill) {}
  Tensor(std::vector<std::size_t> s, std::vector<T> values)
      : shape(std::move(s)), data(std::move(values)) {
    if (data.size() != count(shape)) {
      throw std::invalid_argument("tensor: value count does not match shape");
    }
  }

  static std::size_t count(const std::vector<std::size_t>& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
  }

  std::size_t size() const { return data.size(); }
  T& operator[](std::size_t k) { return data[k]; }
  const T& operator[](std::size_t k) const { return data[k]; }

  // 2-D access; assumes rank 2.
  T& operator()(std::size_t i, std::size_t j) { return data[i * shape[1] + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data[i * shape[1] + j]; }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }

  template <typename U>
  bool same_shape(const Tensor<U>& other) const {
    return shape == other.shape;
  }
};

using RealTensor = Tensor<double>;
using ComplexTensor = Tensor<Complex>;

inline std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t k = 0; k < shape.size(); ++k) {
    if (k) s += "x";
    s += std::to_string(shape[k]);
  }
  return s + "]";
}

template <typename A, typename B>
void require_same_shape(const Tensor<A>& a, const Tensor<B>& b, std::string_view what) {
  if (a.shape != b.shape) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch " + shape_string(a.shape) +
                                " vs " + shape_string(b.shape));
  }
}

}  // namespace wavecoder
