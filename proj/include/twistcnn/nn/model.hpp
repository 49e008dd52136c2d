#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "twistcnn/nn/layers.hpp"

namespace twistcnn::nn {

/// The classifier stack: five [conv 3 -> batch-norm -> ReLU -> max-pool 2] blocks, global average
/// pooling, dense -> batch-norm -> ReLU -> dropout, dense head.
struct ModelSpec {
  int spatial_rank = 2;               // 1: (C, N) signals, 2: (C, N, N) fields
  std::size_t input_channels = 2;
  std::size_t extent = 100;           // N
  std::size_t outputs = 1;            // 1 logit (binary) or 3 (rank classes)
  std::vector<std::size_t> widths{64, 128, 256, 512, 512};
  std::size_t hidden = 256;
  double dropout = 0.5;
  double bn_eps = 1e-5;
  double bn_momentum = 0.1;

  Shape input_shape(std::size_t batch) const {
    return spatial_rank == 1 ? Shape{batch, input_channels, 1, extent} : Shape{batch, input_channels, extent, extent};
  }
};

template <typename T>
class Sequential {
 public:
  Sequential() = default;
  Sequential(Sequential&&) noexcept = default;
  Sequential& operator=(Sequential&&) noexcept = default;

  void add(std::unique_ptr<Layer<T>> layer) { layers_.push_back(std::move(layer)); }

  Tensor<T> forward(const Tensor<T>& x, Mode mode);
  /// Back-propagates dLoss/dOutput through every layer; returns dLoss/dInput.
  Tensor<T> backward(const Tensor<T>& grad_out);

  std::vector<Param<T>*> params();
  std::vector<std::vector<T>*> buffers();
  void zero_grad();
  std::size_t parameter_count();

  /// Output shape after each layer, for a given input shape.
  std::vector<Shape> shape_trace(const Shape& in) const;

  std::size_t size() const { return layers_.size(); }
  Layer<T>& layer(std::size_t i) { return *layers_[i]; }
  const Layer<T>& layer(std::size_t i) const { return *layers_[i]; }

 private:
  std::vector<std::unique_ptr<Layer<T>>> layers_;
};

/// Builds the stack described by `spec` with Kaiming-normal (fan-in) weights, zero biases,
/// gamma = 1, beta = 0. Every random draw derives from `seed`.
template <typename T>
Sequential<T> build_classifier(const ModelSpec& spec, std::uint64_t seed);

/// Kaiming-normal initialisation of conv and dense weights.
template <typename T>
void initialize(Sequential<T>& model, std::uint64_t seed);

/// Standard normal draw via Box-Muller from two uniforms of the stream.
double normal_draw(sampler::CounterRng& rng);

/// Copies parameters and buffers between models of identical structure (e.g. float -> double).
template <typename To, typename From>
void copy_state(Sequential<To>& dst, Sequential<From>& src);

}  // namespace twistcnn::nn
