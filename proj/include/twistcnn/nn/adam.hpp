#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "twistcnn/nn/layers.hpp"

namespace twistcnn::nn {

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction. Moments are stored in binary64 regardless of T.
template <typename T>
class Adam {
 public:
  Adam(std::vector<Param<T>*> params, AdamConfig config = {});

  /// Applies one update from the accumulated gradients. Throws NumericalError, leaving the
  /// parameters untouched, if any gradient is NaN or infinite.
  void step();

  const AdamConfig& config() const { return config_; }
  std::uint64_t steps() const { return t_; }
  std::vector<std::vector<double>>& first_moments() { return m_; }
  std::vector<std::vector<double>>& second_moments() { return v_; }
  void set_steps(std::uint64_t t) { t_ = t; }

 private:
  std::vector<Param<T>*> params_;
  AdamConfig config_;
  std::vector<std::vector<double>> m_, v_;
  std::uint64_t t_ = 0;
};

}  // namespace twistcnn::nn
