#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace twistcnn::nn {

/// Batch-first NCHW shape. One-dimensional signals use h = 1; feature vectors use h = w = 1.
struct Shape {
  std::size_t n = 0, c = 0, h = 1, w = 1;

  std::size_t size() const { return n * c * h * w; }
  std::size_t sample_size() const { return c * h * w; }
  std::size_t plane() const { return h * w; }
  bool operator==(const Shape&) const = default;
  std::string str() const {
    return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," + std::to_string(w) + ")";
  }
};

template <typename T>
struct Tensor {
  Shape shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(Shape s, T fill = T{0}) : shape(s), data(s.size(), fill) {}

  std::size_t size() const { return data.size(); }
  T& operator[](std::size_t i) { return data[i]; }
  const T& operator[](std::size_t i) const { return data[i]; }
  T& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
    return data[((n * shape.c + c) * shape.h + h) * shape.w + w];
  }
  const T& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return data[((n * shape.c + c) * shape.h + h) * shape.w + w];
  }
  std::span<T> sample(std::size_t i) { return std::span<T>(data).subspan(i * shape.sample_size(), shape.sample_size()); }
  std::span<const T> sample(std::size_t i) const {
    return std::span<const T>(data).subspan(i * shape.sample_size(), shape.sample_size());
  }
};

inline void require_shape(const Shape& got, const Shape& want, const char* where) {
  if (got.c != want.c || got.h != want.h || got.w != want.w)
    throw std::invalid_argument(std::string(where) + ": shape mismatch, got " + got.str() + " expected " + want.str());
}

}  // namespace twistcnn::nn
