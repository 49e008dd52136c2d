// Central finite-difference oracle for the binary64 engine.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "twistcnn/nn/layers.hpp"
#include "twistcnn/nn/loss.hpp"
#include "twistcnn/nn/model.hpp"
#include "twistcnn/sampler.hpp"

namespace gradcheck {

using twistcnn::nn::Layer;
using twistcnn::nn::Mode;
using twistcnn::nn::Sequential;
using twistcnn::nn::Shape;
using twistcnn::nn::Tensor;

inline constexpr double step = 1e-4;

/// ||a - b|| / max(||a|| + ||b||, 1e-6). The floor matters for biases feeding a batch-norm,
/// whose exact gradient is zero while the difference quotient carries ~1e-12 of rounding.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  double denom = std::sqrt(na) + std::sqrt(nb);
  return std::sqrt(diff) / std::max(denom, 1e-6);
}

/// Values in ±[0.05, 1.05] with pairwise gaps of at least 1e-3, so that ReLU kinks and max-pool
/// ties stay farther than the finite-difference step from every sample.
inline Tensor<double> spaced_input(Shape s, std::uint64_t seed) {
  Tensor<double> x(s);
  twistcnn::sampler::CounterRng rng(seed);
  std::vector<std::size_t> perm(x.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  const double gap = 1.0 / static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double mag = 0.05 + gap * static_cast<double>(perm[i]);
    x.data[i] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * mag;
  }
  return x;
}

inline std::vector<double> uniform_values(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  twistcnn::sampler::CounterRng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = lo + (hi - lo) * rng.uniform();
  return v;
}

struct Result {
  double input_error = 0.0;
  double param_error = 0.0;  // worst over parameter tensors
  double worst() const { return std::max(input_error, param_error); }
};

/// Checks dL/dx and dL/dparams for a scalar L = loss(forward(x)). `loss` must also fill
/// the upstream gradient when its second argument is non-empty. `reset` restores any
/// stochastic state (dropout streams) before each forward evaluation.
inline Result check(const std::function<Tensor<double>(const Tensor<double>&)>& forward,
                    const std::function<Tensor<double>(const Tensor<double>&)>& backward,
                    const std::function<double(const Tensor<double>&, Tensor<double>*)>& loss,
                    std::vector<std::vector<double>*> values, std::vector<std::vector<double>*> grads, Tensor<double> x,
                    const std::function<void()>& reset = [] {}) {
  for (auto* g : grads) std::fill(g->begin(), g->end(), 0.0);
  reset();
  Tensor<double> y = forward(x);
  Tensor<double> upstream(y.shape);
  loss(y, &upstream);
  Tensor<double> dx = backward(upstream);

  auto eval = [&] {
    reset();
    return loss(forward(x), nullptr);
  };
  Result r;
  std::vector<double> numeric(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x.data[i];
    x.data[i] = keep + step;
    double up = eval();
    x.data[i] = keep - step;
    double down = eval();
    x.data[i] = keep;
    numeric[i] = (up - down) / (2 * step);
  }
  r.input_error = relative_error(dx.data, numeric);
  for (std::size_t p = 0; p < values.size(); ++p) {
    auto& v = *values[p];
    std::vector<double> num(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double keep = v[i];
      v[i] = keep + step;
      double up = eval();
      v[i] = keep - step;
      double down = eval();
      v[i] = keep;
      num[i] = (up - down) / (2 * step);
    }
    r.param_error = std::max(r.param_error, relative_error(*grads[p], num));
  }
  return r;
}

/// L = sum_i w_i y_i with fixed random weights w.
inline std::function<double(const Tensor<double>&, Tensor<double>*)> linear_loss(std::size_t n, std::uint64_t seed) {
  auto w = uniform_values(n, seed);
  return [w](const Tensor<double>& y, Tensor<double>* g) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * y.data[i];
    if (g) g->data = w;
    return s;
  };
}

inline Result check_layer(Layer<double>& layer, const Shape& in, Mode mode, std::uint64_t seed) {
  auto x = spaced_input(in, seed);
  std::vector<std::vector<double>*> values, grads;
  for (auto* p : layer.params()) {
    values.push_back(&p->value);
    grads.push_back(&p->grad);
  }
  std::function<void()> reset = [] {};
  if (auto* d = dynamic_cast<twistcnn::nn::Dropout<double>*>(&layer)) {
    auto saved = d->rng();
    reset = [d, saved] { d->rng() = saved; };
  }
  return check([&](const Tensor<double>& t) { return layer.forward(t, mode); },
               [&](const Tensor<double>& g) { return layer.backward(g); },
               linear_loss(layer.output_shape(in).size(), seed + 1), values, grads, x, reset);
}

inline Result check_model(Sequential<double>& model, const Shape& in, Mode mode,
                          const std::function<double(const Tensor<double>&, Tensor<double>*)>& loss, std::uint64_t seed) {
  auto x = spaced_input(in, seed);
  std::vector<std::vector<double>*> values, grads;
  for (auto* p : model.params()) {
    values.push_back(&p->value);
    grads.push_back(&p->grad);
  }
  std::vector<std::pair<twistcnn::nn::Dropout<double>*, twistcnn::sampler::CounterRng>> streams;
  for (std::size_t i = 0; i < model.size(); ++i)
    if (auto* d = dynamic_cast<twistcnn::nn::Dropout<double>*>(&model.layer(i))) streams.emplace_back(d, d->rng());
  return check([&](const Tensor<double>& t) { return model.forward(t, mode); },
               [&](const Tensor<double>& g) { return model.backward(g); }, loss, values, grads, x,
               [&] {
                 for (auto& [d, rng] : streams) d->rng() = rng;
               });
}

inline std::function<double(const Tensor<double>&, Tensor<double>*)> bce_loss(std::vector<std::uint8_t> labels,
                                                                              double pos_weight) {
  return [labels, pos_weight](const Tensor<double>& y, Tensor<double>* g) {
    std::span<double> gs = g ? std::span<double>(g->data) : std::span<double>{};
    return twistcnn::nn::weighted_bce_with_logits<double>(y.data, labels, pos_weight, gs);
  };
}

inline std::function<double(const Tensor<double>&, Tensor<double>*)> ce_loss(std::vector<std::uint8_t> classes,
                                                                             std::size_t k) {
  return [classes, k](const Tensor<double>& y, Tensor<double>* g) {
    std::span<double> gs = g ? std::span<double>(g->data) : std::span<double>{};
    return twistcnn::nn::cross_entropy<double>(y.data, classes, k, gs);
  };
}

/// Gradient of a loss with respect to its logits, checked directly.
inline double check_loss(const std::function<double(const Tensor<double>&, Tensor<double>*)>& loss, Shape s,
                         std::uint64_t seed) {
  Tensor<double> x(s);
  x.data = uniform_values(x.size(), seed, -3.0, 3.0);
  Tensor<double> g(s);
  loss(x, &g);
  std::vector<double> num(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x.data[i];
    x.data[i] = keep + step;
    double up = loss(x, nullptr);
    x.data[i] = keep - step;
    double down = loss(x, nullptr);
    x.data[i] = keep;
    num[i] = (up - down) / (2 * step);
  }
  return relative_error(g.data, num);
}

}  // namespace gradcheck
