#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "twistcnn/nn/tensor.hpp"
#include "twistcnn/sampler.hpp"

namespace twistcnn::nn {

enum class Mode { train, eval };

enum class LayerKind : std::uint8_t { conv = 1, batchnorm = 2, relu = 3, maxpool = 4, global_avg_pool = 5, dense = 6, dropout = 7 };

/// Hyperparameters sufficient to rebuild a layer (checkpoint files store these).
struct LayerSpec {
  LayerKind kind{};
  std::size_t in = 0, out = 0;  // channels or features
  std::size_t kh = 1, kw = 1;   // kernel or pooling window
  double eps = 0.0, momentum = 0.0, rate = 0.0;
  bool operator==(const LayerSpec&) const = default;
};

template <typename T>
struct Param {
  std::string name;
  std::vector<T> value;
  std::vector<T> grad;

  Param(std::string n, std::size_t size) : name(std::move(n)), value(size, T{0}), grad(size, T{0}) {}
};

template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;

  virtual LayerSpec spec() const = 0;
  virtual std::string name() const = 0;
  virtual Shape output_shape(const Shape& in) const = 0;

  /// Caches whatever backward() needs from this call.
  virtual Tensor<T> forward(const Tensor<T>& x, Mode mode) = 0;
  /// Accumulates parameter gradients and returns dLoss/dInput for the last forward call.
  virtual Tensor<T> backward(const Tensor<T>& grad_out) = 0;

  virtual std::vector<Param<T>*> params() { return {}; }
  /// Non-trainable state saved with the model (batch-norm running statistics).
  virtual std::vector<std::vector<T>*> buffers() { return {}; }
};

/// Stride-1 cross-correlation with zero padding kh/2, kw/2, so spatial extents are preserved.
/// A 1 x 3 kernel gives the one-dimensional layer.
template <typename T>
class Conv : public Layer<T> {
 public:
  Conv(std::size_t in_channels, std::size_t out_channels, std::size_t kh, std::size_t kw);

  LayerSpec spec() const override { return {LayerKind::conv, in_, out_, kh_, kw_}; }
  std::string name() const override;
  Shape output_shape(const Shape& in) const override;
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  std::vector<Param<T>*> params() override { return {&weight_, &bias_}; }

  Param<T>& weight() { return weight_; }  // (out, in, kh, kw)
  Param<T>& bias() { return bias_; }

 private:
  void im2col(std::span<const T> x, std::size_t h, std::size_t w);
  void col2im(std::span<T> dx, std::size_t h, std::size_t w) const;

  std::size_t in_, out_, kh_, kw_;
  Param<T> weight_, bias_;
  Tensor<T> input_;
  std::vector<T> col_;
};

/// Per-channel normalisation over batch and spatial positions.
template <typename T>
class BatchNorm : public Layer<T> {
 public:
  explicit BatchNorm(std::size_t channels, double eps = 1e-5, double momentum = 0.1);

  LayerSpec spec() const override { return {LayerKind::batchnorm, channels_, channels_, 1, 1, eps_, momentum_}; }
  std::string name() const override { return "batchnorm(" + std::to_string(channels_) + ")"; }
  Shape output_shape(const Shape& in) const override { return in; }
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  std::vector<Param<T>*> params() override { return {&gamma_, &beta_}; }
  std::vector<std::vector<T>*> buffers() override { return {&running_mean_, &running_var_}; }

  Param<T>& gamma() { return gamma_; }
  Param<T>& beta() { return beta_; }
  const std::vector<T>& running_mean() const { return running_mean_; }
  const std::vector<T>& running_var() const { return running_var_; }

 private:
  std::size_t channels_;
  double eps_, momentum_;
  Param<T> gamma_, beta_;
  std::vector<T> running_mean_, running_var_;
  Mode mode_ = Mode::eval;
  Tensor<T> xhat_;
  std::vector<T> inv_std_;
};

template <typename T>
class Relu : public Layer<T> {
 public:
  LayerSpec spec() const override { return {LayerKind::relu}; }
  std::string name() const override { return "relu"; }
  Shape output_shape(const Shape& in) const override { return in; }
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;

 private:
  std::vector<std::uint8_t> positive_;
  Shape shape_;
};

/// Window = stride; trailing rows/columns that do not fill a window are dropped.
template <typename T>
class MaxPool : public Layer<T> {
 public:
  MaxPool(std::size_t kh, std::size_t kw) : kh_(kh), kw_(kw) {}

  LayerSpec spec() const override { return {LayerKind::maxpool, 0, 0, kh_, kw_}; }
  std::string name() const override { return "maxpool(" + std::to_string(kh_) + "x" + std::to_string(kw_) + ")"; }
  Shape output_shape(const Shape& in) const override;
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;

 private:
  std::size_t kh_, kw_;
  Shape in_shape_;
  std::vector<std::uint32_t> argmax_;
};

template <typename T>
class GlobalAvgPool : public Layer<T> {
 public:
  LayerSpec spec() const override { return {LayerKind::global_avg_pool}; }
  std::string name() const override { return "global_avg_pool"; }
  Shape output_shape(const Shape& in) const override { return {in.n, in.c, 1, 1}; }
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;

 private:
  Shape in_shape_;
};

/// y = W x + b on the flattened sample, W stored (out, in).
template <typename T>
class Dense : public Layer<T> {
 public:
  Dense(std::size_t in, std::size_t out);

  LayerSpec spec() const override { return {LayerKind::dense, in_, out_}; }
  std::string name() const override { return "dense(" + std::to_string(in_) + "->" + std::to_string(out_) + ")"; }
  Shape output_shape(const Shape& in) const override { return {in.n, out_, 1, 1}; }
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  std::vector<Param<T>*> params() override { return {&weight_, &bias_}; }

  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }

 private:
  std::size_t in_, out_;
  Param<T> weight_, bias_;
  Tensor<T> input_;
};

/// Inverted dropout: in training each unit is zeroed with probability `rate` and survivors are
/// scaled by 1 / (1 - rate). Identity in eval mode.
template <typename T>
class Dropout : public Layer<T> {
 public:
  Dropout(double rate, std::uint64_t seed) : rate_(rate), rng_(seed) {}

  LayerSpec spec() const override { return {LayerKind::dropout, 0, 0, 1, 1, 0.0, 0.0, rate_}; }
  std::string name() const override { return "dropout(" + std::to_string(rate_) + ")"; }
  Shape output_shape(const Shape& in) const override { return in; }
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;

  sampler::CounterRng& rng() { return rng_; }

 private:
  double rate_;
  sampler::CounterRng rng_;
  std::vector<T> mask_;
  Mode mode_ = Mode::eval;
};

template <typename T>
std::unique_ptr<Layer<T>> make_layer(const LayerSpec& spec, std::uint64_t seed = 0);

}  // namespace twistcnn::nn
