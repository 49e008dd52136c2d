#include "twistcnn/nn/adam.hpp"

#include <cmath>

namespace twistcnn::nn {

template <typename T>
Adam<T>::Adam(std::vector<Param<T>*> params, AdamConfig config) : params_(std::move(params)), config_(config) {
  for (auto* p : params_) {
    m_.emplace_back(p->value.size(), 0.0);
    v_.emplace_back(p->value.size(), 0.0);
  }
}

template <typename T>
void Adam<T>::step() {
  for (std::size_t i = 0; i < params_.size(); ++i)
    for (std::size_t k = 0; k < params_[i]->grad.size(); ++k)
      if (!std::isfinite(static_cast<double>(params_[i]->grad[k])))
        throw NumericalError("Adam: non-finite gradient in parameter #" + std::to_string(i) + " (" + params_[i]->name +
                             ") at index " + std::to_string(k));
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = *params_[i];
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double g = p.grad[k];
      m[k] = b1 * m[k] + (1.0 - b1) * g;
      v[k] = b2 * v[k] + (1.0 - b2) * g * g;
      const double mhat = m[k] / c1, vhat = v[k] / c2;
      p.value[k] = static_cast<T>(p.value[k] - config_.lr * mhat / (std::sqrt(vhat) + config_.eps));
    }
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace twistcnn::nn
