#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "twistcnn/curve_arith.hpp"
#include "twistcnn/encode.hpp"
#include "twistcnn/nn/tensor.hpp"
#include "twistcnn/sampler.hpp"

namespace twistcnn::harness {

/// Labelled samples kept in compact form: one length-N row per sample. For 1-d datasets the row
/// is the network input itself; for 2-d datasets it holds z_p and the (2, N, N) twist tensor is
/// produced on demand from the shared character basis, so a batch is materialised only when used.
struct LabeledDataset {
  int spatial_rank = 1;
  std::size_t extent = 0;
  std::vector<std::vector<double>> rows;
  std::vector<std::uint8_t> labels;
  std::vector<std::string> provenance;  // curve label or "seed:<seed>/<index>"
  std::shared_ptr<const encode::TwistBasis> basis;
  nlohmann::ordered_json manifest = nlohmann::ordered_json::object();

  std::size_t size() const { return labels.size(); }
  std::size_t channels() const { return spatial_rank == 2 ? 2 : 1; }
  nn::Shape batch_shape(std::size_t batch) const {
    return spatial_rank == 2 ? nn::Shape{batch, 2, extent, extent} : nn::Shape{batch, 1, 1, extent};
  }
  /// Writes the listed samples, in order, into `out` (reshaped to the batch).
  void materialize(std::span<const std::size_t> indices, nn::Tensor<float>& out) const;
  template <typename T>
  nn::Tensor<T> batch(std::span<const std::size_t> indices) const;

  std::map<int, std::size_t> label_counts() const;
  LabeledDataset subset(std::span<const std::size_t> indices) const;
  /// SHA-256 over shape, rows, labels and provenance.
  std::string digest() const;
};

struct AssemblyOptions {
  /// Feed the random vectors' continuous x~_p instead of the integer x_p.
  bool literal_paper_mode = false;
};

/// Curves (label 1) use their integer a_p; random vectors (label 0) their integer x_p, or x~_p in
/// literal mode. Throws std::invalid_argument on a length mismatch.
LabeledDataset assemble_1d(const std::vector<arith::TraceVector>& curves,
                           const std::vector<sampler::RandomTraceVector>& random, std::size_t n,
                           const AssemblyOptions& options = {});

/// z_p = a_p / (2 sqrt p) for curves and x_p / (2 sqrt p) clamped to [-1, 1] for random vectors
/// (x~_p in literal mode), twisted by the basis characters.
LabeledDataset assemble_2d(const std::vector<arith::TraceVector>& curves,
                           const std::vector<sampler::RandomTraceVector>& random,
                           std::shared_ptr<const encode::TwistBasis> basis, const AssemblyOptions& options = {});

/// 2-d dataset of curves labelled by rank; curves of rank >= 3 are dropped (counted in the manifest).
LabeledDataset assemble_rank(const std::vector<arith::TraceVector>& traces,
                             const std::vector<arith::WeierstrassCurve>& curves,
                             std::shared_ptr<const encode::TwistBasis> basis);

/// Basis for the first n primes against the first n primitive characters.
std::shared_ptr<const encode::TwistBasis> make_basis(std::size_t n);

/// Concatenation of two datasets with the same layout.
LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b);

struct Split {
  LabeledDataset train, test;
};

/// Stratified by label: each class contributes round(fraction * count) samples to train.
/// Deterministic in `seed`.
Split split(const LabeledDataset& ds, double train_fraction, std::uint64_t seed);

/// Per-stratum train counts, exposed so the arithmetic can be checked without building data.
std::map<int, std::size_t> train_counts(const std::map<int, std::size_t>& counts, double train_fraction);

/// True when no provenance key occurs in both datasets.
bool provenance_disjoint(const LabeledDataset& a, const LabeledDataset& b);

std::string sha256_hex(std::span<const std::uint8_t> bytes);

}  // namespace twistcnn::harness
