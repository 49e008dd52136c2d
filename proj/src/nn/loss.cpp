#include "twistcnn/nn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace twistcnn::nn {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

template <typename T>
double weighted_bce_with_logits(std::span<const T> logits, std::span<const std::uint8_t> labels, double pos_weight,
                                std::span<T> grad) {
  if (logits.size() != labels.size()) throw std::invalid_argument("weighted_bce_with_logits: size mismatch");
  if (!grad.empty() && grad.size() != logits.size()) throw std::invalid_argument("weighted_bce_with_logits: grad size");
  const double n = static_cast<double>(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double l = logits[i];
    const double y = labels[i] ? 1.0 : 0.0;
    // -log sigmoid(l) = softplus(-l), -log(1 - sigmoid(l)) = softplus(l)
    total += pos_weight * y * softplus(-l) + (1.0 - y) * softplus(l);
    if (!grad.empty()) {
      const double s = sigmoid(l);
      grad[i] = static_cast<T>((pos_weight * y * (s - 1.0) + (1.0 - y) * s) / n);
    }
  }
  return logits.empty() ? 0.0 : total / n;
}

template <typename T>
double cross_entropy(std::span<const T> logits, std::span<const std::uint8_t> classes, std::size_t k,
                     std::span<T> grad) {
  if (k == 0 || logits.size() != classes.size() * k) throw std::invalid_argument("cross_entropy: shape mismatch");
  if (!grad.empty() && grad.size() != logits.size()) throw std::invalid_argument("cross_entropy: grad size");
  const double n = static_cast<double>(classes.size());
  double total = 0.0;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] >= k) throw std::invalid_argument("cross_entropy: class " + std::to_string(classes[i]) + " out of range");
    auto row = logits.subspan(i * k, k);
    double hi = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (auto v : row) z += std::exp(v - hi);
    double lse = hi + std::log(z);
    total += lse - row[classes[i]];
    if (!grad.empty())
      for (std::size_t j = 0; j < k; ++j)
        grad[i * k + j] = static_cast<T>((std::exp(row[j] - lse) - (j == classes[i] ? 1.0 : 0.0)) / n);
  }
  return classes.empty() ? 0.0 : total / n;
}

template <typename T>
std::size_t argmax(std::span<const T> row) {
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

template double weighted_bce_with_logits<float>(std::span<const float>, std::span<const std::uint8_t>, double, std::span<float>);
template double weighted_bce_with_logits<double>(std::span<const double>, std::span<const std::uint8_t>, double, std::span<double>);
template double cross_entropy<float>(std::span<const float>, std::span<const std::uint8_t>, std::size_t, std::span<float>);
template double cross_entropy<double>(std::span<const double>, std::span<const std::uint8_t>, std::size_t, std::span<double>);
template std::size_t argmax<float>(std::span<const float>);
template std::size_t argmax<double>(std::span<const double>);

}  // namespace twistcnn::nn
