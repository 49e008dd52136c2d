#include "twistcnn/harness/saliency.hpp"

#include <cmath>
#include <ostream>

#include "twistcnn/nn/loss.hpp"

namespace twistcnn::harness {

std::vector<double> SaliencyMap::average() const {
  std::vector<double> avg(red.size());
  for (std::size_t i = 0; i < avg.size(); ++i) avg[i] = 0.5 * (red[i] + blue[i]);
  return avg;
}

Marginals marginals(std::span<const double> map, std::size_t rows, std::size_t cols) {
  if (map.size() != rows * cols) throw std::invalid_argument("marginals: size mismatch");
  Marginals m{std::vector<double>(rows, 0.0), std::vector<double>(cols, 0.0)};
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += map[i * cols + j];
    m.per_prime[i] = s / static_cast<double>(cols);
  }
  for (std::size_t j = 0; j < cols; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows; ++i) s += map[i * cols + j];
    m.per_twist[j] = s / static_cast<double>(rows);
  }
  return m;
}

template <typename T>
SaliencyMap saliency(nn::Sequential<T>& model, const LabeledDataset& ds, std::span<const std::size_t> samples,
                     SaliencyTarget target, std::size_t fixed_class, std::size_t batch_size) {
  if (ds.spatial_rank != 2) throw std::invalid_argument("saliency: needs a two-channel field dataset");
  const std::size_t n = ds.extent, plane = n * n;
  SaliencyMap map;
  map.rows = map.cols = n;
  map.red.assign(plane, 0.0);
  map.blue.assign(plane, 0.0);
  map.samples = samples.size();
  if (samples.empty()) return map;
  for (std::size_t start = 0; start < samples.size(); start += batch_size) {
    auto idx = samples.subspan(start, std::min(batch_size, samples.size() - start));
    auto x = ds.batch<T>(idx);
    auto y = model.forward(x, nn::Mode::eval);
    const std::size_t k = y.shape.sample_size();
    nn::Tensor<T> upstream(y.shape);
    for (std::size_t s = 0; s < idx.size(); ++s) {
      std::size_t cls = 0;
      if (target == SaliencyTarget::logit) {
        if (k != 1) throw std::invalid_argument("saliency: logit target needs a single-output model");
      } else if (target == SaliencyTarget::predicted_class) {
        cls = nn::argmax<T>(std::span<const T>(y.data).subspan(s * k, k));
      } else {
        cls = fixed_class;
        if (cls >= k) throw std::invalid_argument("saliency: class out of range");
      }
      upstream.data[s * k + cls] = T{1};
    }
    auto dx = model.backward(upstream);
    for (std::size_t s = 0; s < idx.size(); ++s) {
      const T* g = dx.data.data() + s * 2 * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        map.red[i] += std::abs(static_cast<double>(g[i]));
        map.blue[i] += std::abs(static_cast<double>(g[plane + i]));
      }
    }
  }
  const double count = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < plane; ++i) {
    map.red[i] /= count;
    map.blue[i] /= count;
  }
  return map;
}

template SaliencyMap saliency<float>(nn::Sequential<float>&, const LabeledDataset&, std::span<const std::size_t>,
                                     SaliencyTarget, std::size_t, std::size_t);
template SaliencyMap saliency<double>(nn::Sequential<double>&, const LabeledDataset&, std::span<const std::size_t>,
                                      SaliencyTarget, std::size_t, std::size_t);

std::vector<std::size_t> indices_with_label(const LabeledDataset& ds, std::uint8_t label) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (ds.labels[i] == label) out.push_back(i);
  return out;
}

double column0_dominance(const SaliencyMap& map) {
  if (map.cols < 2) throw std::invalid_argument("column0_dominance: need at least two columns");
  auto m = marginals(map.average(), map.rows, map.cols);
  double rest = 0.0;
  for (std::size_t j = 1; j < map.cols; ++j) rest += m.per_twist[j];
  rest /= static_cast<double>(map.cols - 1);
  return rest == 0.0 ? (m.per_twist[0] > 0.0 ? INFINITY : 0.0) : m.per_twist[0] / rest;
}

void write_saliency_csv(std::ostream& out, const SaliencyMap& map, const encode::TwistBasis* basis) {
  out << "row,col,prime,character_modulus,character_index,s_r,s_b,average\n";
  out.precision(17);
  for (std::size_t i = 0; i < map.rows; ++i)
    for (std::size_t j = 0; j < map.cols; ++j) {
      out << i << ',' << j << ',';
      if (basis) out << basis->primes()[i] << ',' << basis->characters()[j].modulus();
      else out << ',';
      out << ',' << j << ',' << map.r(i, j) << ',' << map.b(i, j) << ',' << 0.5 * (map.r(i, j) + map.b(i, j)) << '\n';
    }
}

void write_marginals_csv(std::ostream& out, const SaliencyMap& map) {
  out << "map,axis,index,value\n";
  out.precision(17);
  auto emit = [&](const char* name, std::span<const double> values) {
    auto m = marginals(values, map.rows, map.cols);
    for (std::size_t i = 0; i < m.per_prime.size(); ++i) out << name << ",prime," << i << ',' << m.per_prime[i] << '\n';
    for (std::size_t j = 0; j < m.per_twist.size(); ++j) out << name << ",twist," << j << ',' << m.per_twist[j] << '\n';
  };
  emit("r", map.red);
  emit("b", map.blue);
  emit("average", map.average());
}

void write_saliency_pngs(const std::filesystem::path& dir, const SaliencyMap& map) {
  std::filesystem::create_directories(dir);
  encode::write_png(dir / "saliency_r.png", encode::heatmap(map.red, map.rows, map.cols));
  encode::write_png(dir / "saliency_b.png", encode::heatmap(map.blue, map.rows, map.cols));
  encode::write_png(dir / "saliency_avg.png", encode::heatmap(map.average(), map.rows, map.cols));
}

}  // namespace twistcnn::harness
