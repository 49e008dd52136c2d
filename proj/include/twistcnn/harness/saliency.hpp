#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "twistcnn/harness/dataset.hpp"
#include "twistcnn/nn/model.hpp"

namespace twistcnn::harness {

/// Mean absolute input gradient of the pre-sigmoid score over a set of samples, split by channel.
/// Rows are primes, columns characters.
struct SaliencyMap {
  std::size_t rows = 0, cols = 0;
  std::vector<double> red, blue;  // S_R, S_B
  std::size_t samples = 0;
  int epoch = 0;

  double r(std::size_t row, std::size_t col) const { return red[row * cols + col]; }
  double b(std::size_t row, std::size_t col) const { return blue[row * cols + col]; }
  /// (S_R + S_B) / 2
  std::vector<double> average() const;
};

/// Row/column means of a rows x cols map: per_prime[i] averages row i over the characters,
/// per_twist[j] averages column j over the primes.
struct Marginals {
  std::vector<double> per_prime, per_twist;
};
Marginals marginals(std::span<const double> map, std::size_t rows, std::size_t cols);

enum class SaliencyTarget {
  logit,            // the single output (binary head)
  predicted_class,  // the argmax logit of each sample
  fixed_class,
};

/// Gradients are taken in eval mode, one backward pass per batch with a one-hot upstream per sample.
template <typename T>
SaliencyMap saliency(nn::Sequential<T>& model, const LabeledDataset& ds, std::span<const std::size_t> samples,
                     SaliencyTarget target = SaliencyTarget::logit, std::size_t fixed_class = 0,
                     std::size_t batch_size = 64);

/// Indices of the samples with the given label.
std::vector<std::size_t> indices_with_label(const LabeledDataset& ds, std::uint8_t label);

/// Mean of column 0 of the averaged map over the mean of all other columns.
double column0_dominance(const SaliencyMap& map);

/// Columns: row,col,prime,character_modulus,character_index,s_r,s_b,average
void write_saliency_csv(std::ostream& out, const SaliencyMap& map, const encode::TwistBasis* basis = nullptr);
/// Columns: map,axis,index,value (map in {r,b,average}, axis in {prime,twist})
void write_marginals_csv(std::ostream& out, const SaliencyMap& map);
/// saliency_r.png, saliency_b.png, saliency_avg.png heat maps in `dir`.
void write_saliency_pngs(const std::filesystem::path& dir, const SaliencyMap& map);

}  // namespace twistcnn::harness
