#pragma once

#include <cstdint>
#include <span>

namespace twistcnn::nn {

/// Weighted binary cross entropy on logits, mean over the batch:
///   -[w y log sigmoid(l) + (1 - y) log(1 - sigmoid(l))]
/// evaluated through softplus so large |l| neither overflows nor loses the tail. `grad` (if
/// non-empty) receives d(mean loss)/d(logit).
template <typename T>
double weighted_bce_with_logits(std::span<const T> logits, std::span<const std::uint8_t> labels, double pos_weight,
                                std::span<T> grad = {});

/// Softmax cross entropy, mean over the batch; logits are row-major (batch, classes).
template <typename T>
double cross_entropy(std::span<const T> logits, std::span<const std::uint8_t> classes, std::size_t num_classes,
                     std::span<T> grad = {});

/// Index of the largest logit (first on ties).
template <typename T>
std::size_t argmax(std::span<const T> row);

double softplus(double x);
double sigmoid(double x);

}  // namespace twistcnn::nn
