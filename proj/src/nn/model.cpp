#include "twistcnn/nn/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace twistcnn::nn {

template <typename T>
Tensor<T> Sequential<T>::forward(const Tensor<T>& x, Mode mode) {
  if (layers_.empty()) return x;
  Tensor<T> h = layers_.front()->forward(x, mode);
  for (std::size_t i = 1; i < layers_.size(); ++i) h = layers_[i]->forward(h, mode);
  return h;
}

template <typename T>
Tensor<T> Sequential<T>::backward(const Tensor<T>& grad_out) {
  if (layers_.empty()) return grad_out;
  Tensor<T> g = layers_.back()->backward(grad_out);
  for (std::size_t i = layers_.size() - 1; i-- > 0;) g = layers_[i]->backward(g);
  return g;
}

template <typename T>
std::vector<Param<T>*> Sequential<T>::params() {
  std::vector<Param<T>*> out;
  for (auto& l : layers_)
    for (auto* p : l->params()) out.push_back(p);
  return out;
}

template <typename T>
std::vector<std::vector<T>*> Sequential<T>::buffers() {
  std::vector<std::vector<T>*> out;
  for (auto& l : layers_)
    for (auto* b : l->buffers()) out.push_back(b);
  return out;
}

template <typename T>
void Sequential<T>::zero_grad() {
  for (auto* p : params()) std::fill(p->grad.begin(), p->grad.end(), T{0});
}

template <typename T>
std::size_t Sequential<T>::parameter_count() {
  std::size_t n = 0;
  for (auto* p : params()) n += p->value.size();
  return n;
}

template <typename T>
std::vector<Shape> Sequential<T>::shape_trace(const Shape& in) const {
  std::vector<Shape> out;
  Shape s = in;
  for (const auto& l : layers_) {
    s = l->output_shape(s);
    out.push_back(s);
  }
  return out;
}

double normal_draw(sampler::CounterRng& rng) {
  double u1 = rng.uniform(), u2 = rng.uniform();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

template <typename T>
void initialize(Sequential<T>& model, std::uint64_t seed) {
  const sampler::CounterRng root(seed);
  for (std::size_t i = 0; i < model.size(); ++i) {
    auto spec = model.layer(i).spec();
    if (spec.kind != LayerKind::conv && spec.kind != LayerKind::dense) continue;
    auto params = model.layer(i).params();
    auto& w = *params[0];
    auto& b = *params[1];
    const double fan_in = static_cast<double>(spec.in * spec.kh * spec.kw);
    const double std_dev = std::sqrt(2.0 / fan_in);
    auto rng = root.split(i);
    for (auto& v : w.value) v = static_cast<T>(std_dev * normal_draw(rng));
    std::fill(b.value.begin(), b.value.end(), T{0});
  }
}

template <typename T>
Sequential<T> build_classifier(const ModelSpec& spec, std::uint64_t seed) {
  if (spec.spatial_rank != 1 && spec.spatial_rank != 2) throw std::invalid_argument("ModelSpec: spatial rank must be 1 or 2");
  if (spec.widths.empty()) throw std::invalid_argument("ModelSpec: no convolution blocks");
  const std::size_t kh = spec.spatial_rank == 2 ? 3 : 1, ph = spec.spatial_rank == 2 ? 2 : 1;
  Sequential<T> m;
  std::size_t in = spec.input_channels;
  for (std::size_t width : spec.widths) {
    m.add(std::make_unique<Conv<T>>(in, width, kh, 3));
    m.add(std::make_unique<BatchNorm<T>>(width, spec.bn_eps, spec.bn_momentum));
    m.add(std::make_unique<Relu<T>>());
    m.add(std::make_unique<MaxPool<T>>(ph, 2));
    in = width;
  }
  m.add(std::make_unique<GlobalAvgPool<T>>());
  m.add(std::make_unique<Dense<T>>(in, spec.hidden));
  m.add(std::make_unique<BatchNorm<T>>(spec.hidden, spec.bn_eps, spec.bn_momentum));
  m.add(std::make_unique<Relu<T>>());
  m.add(std::make_unique<Dropout<T>>(spec.dropout, sampler::CounterRng::mix(seed ^ 0xD50D50D5ULL)));
  m.add(std::make_unique<Dense<T>>(spec.hidden, spec.outputs));
  m.shape_trace(spec.input_shape(1));  // validates extents against the pooling ladder
  initialize(m, seed);
  return m;
}

template <typename To, typename From>
void copy_state(Sequential<To>& dst, Sequential<From>& src) {
  auto dp = dst.params();
  auto sp = src.params();
  auto db = dst.buffers();
  auto sb = src.buffers();
  if (dp.size() != sp.size() || db.size() != sb.size()) throw std::invalid_argument("copy_state: structure mismatch");
  for (std::size_t i = 0; i < dp.size(); ++i) {
    if (dp[i]->value.size() != sp[i]->value.size()) throw std::invalid_argument("copy_state: size mismatch");
    for (std::size_t k = 0; k < dp[i]->value.size(); ++k) dp[i]->value[k] = static_cast<To>(sp[i]->value[k]);
  }
  for (std::size_t i = 0; i < db.size(); ++i)
    for (std::size_t k = 0; k < db[i]->size(); ++k) (*db[i])[k] = static_cast<To>((*sb[i])[k]);
}

template class Sequential<float>;
template class Sequential<double>;
template Sequential<float> build_classifier<float>(const ModelSpec&, std::uint64_t);
template Sequential<double> build_classifier<double>(const ModelSpec&, std::uint64_t);
template void initialize<float>(Sequential<float>&, std::uint64_t);
template void initialize<double>(Sequential<double>&, std::uint64_t);
template void copy_state<double, float>(Sequential<double>&, Sequential<float>&);
template void copy_state<float, double>(Sequential<float>&, Sequential<double>&);
template void copy_state<float, float>(Sequential<float>&, Sequential<float>&);

}  // namespace twistcnn::nn
