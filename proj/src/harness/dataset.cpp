#include "twistcnn/harness/dataset.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>
#include <stdexcept>

#include "twistcnn/characters.hpp"
#include "twistcnn/primes.hpp"

namespace twistcnn::harness {

void LabeledDataset::materialize(std::span<const std::size_t> indices, nn::Tensor<float>& out) const {
  out.shape = batch_shape(indices.size());
  out.data.resize(out.shape.size());
  const std::size_t stride = out.shape.sample_size();
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto& row = rows.at(indices[k]);
    std::span<float> dst(out.data.data() + k * stride, stride);
    if (spatial_rank == 2) {
      encode::twist_channels(row, *basis, dst);
    } else {
      for (std::size_t i = 0; i < extent; ++i) dst[i] = static_cast<float>(row[i]);
    }
  }
}

template <typename T>
nn::Tensor<T> LabeledDataset::batch(std::span<const std::size_t> indices) const {
  nn::Tensor<float> f;
  materialize(indices, f);
  if constexpr (std::is_same_v<T, float>) {
    return f;
  } else {
    nn::Tensor<T> out(f.shape);
    std::copy(f.data.begin(), f.data.end(), out.data.begin());
    return out;
  }
}

template nn::Tensor<float> LabeledDataset::batch<float>(std::span<const std::size_t>) const;
template nn::Tensor<double> LabeledDataset::batch<double>(std::span<const std::size_t>) const;

std::map<int, std::size_t> LabeledDataset::label_counts() const {
  std::map<int, std::size_t> counts;
  for (auto l : labels) ++counts[l];
  return counts;
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out;
  out.spatial_rank = spatial_rank;
  out.extent = extent;
  out.basis = basis;
  out.manifest = manifest;
  out.rows.reserve(indices.size());
  for (auto i : indices) {
    out.rows.push_back(rows.at(i));
    out.labels.push_back(labels[i]);
    out.provenance.push_back(provenance[i]);
  }
  return out;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr))
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned i = 0; i < len; ++i) {
    s += hex[md[i] >> 4];
    s += hex[md[i] & 15];
  }
  return s;
}

std::string LabeledDataset::digest() const {
  std::vector<std::uint8_t> buf;
  auto put = [&](const void* p, std::size_t n) {
    auto* b = static_cast<const std::uint8_t*>(p);
    buf.insert(buf.end(), b, b + n);
  };
  std::uint64_t head[3] = {static_cast<std::uint64_t>(spatial_rank), extent, size()};
  put(head, sizeof head);
  for (std::size_t i = 0; i < size(); ++i) {
    put(rows[i].data(), rows[i].size() * sizeof(double));
    put(&labels[i], 1);
    put(provenance[i].data(), provenance[i].size());
    buf.push_back(0);
  }
  return sha256_hex(buf);
}

namespace {

void check_length(std::size_t got, std::size_t n, const std::string& origin) {
  if (got != n)
    throw std::invalid_argument("trace vector " + origin + " has length " + std::to_string(got) + ", expected " +
                                std::to_string(n));
}

LabeledDataset skeleton(int rank, std::size_t n, bool literal) {
  LabeledDataset ds;
  ds.spatial_rank = rank;
  ds.extent = n;
  ds.manifest["spatial_rank"] = rank;
  ds.manifest["n"] = n;
  ds.manifest["random_input"] = literal ? "x_tilde (literal)" : (rank == 1 ? "integer x_p" : "x_p / (2 sqrt p), clamped");
  return ds;
}

}  // namespace

LabeledDataset assemble_1d(const std::vector<arith::TraceVector>& curves,
                           const std::vector<sampler::RandomTraceVector>& random, std::size_t n,
                           const AssemblyOptions& options) {
  LabeledDataset ds = skeleton(1, n, options.literal_paper_mode);
  for (const auto& tv : curves) {
    check_length(tv.values.size(), n, tv.origin);
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!arith::within_hasse(tv.values[i], tv.primes[i]))
        throw std::domain_error("curve " + tv.origin + " violates the Hasse bound at p = " + std::to_string(tv.primes[i]));
      row[i] = static_cast<double>(tv.values[i]);
    }
    ds.rows.push_back(std::move(row));
    ds.labels.push_back(1);
    ds.provenance.push_back(tv.origin);
  }
  std::uint64_t clamped = 0;
  for (const auto& rv : random) {
    check_length(rv.int_values.size(), n, rv.origin());
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (options.literal_paper_mode) {
        row[i] = rv.tilde_values[i];
        continue;
      }
      std::int64_t x = rv.int_values[i];
      if (!arith::within_hasse(x, rv.primes[i])) {
        auto bound = static_cast<std::int64_t>(std::floor(2.0 * std::sqrt(static_cast<double>(rv.primes[i]))));
        x = x > 0 ? bound : -bound;
        ++clamped;
      }
      row[i] = static_cast<double>(x);
    }
    ds.rows.push_back(std::move(row));
    ds.labels.push_back(0);
    ds.provenance.push_back(rv.origin());
  }
  ds.manifest["curves"] = curves.size();
  ds.manifest["random"] = random.size();
  ds.manifest["hasse_clamped_entries"] = clamped;
  return ds;
}

LabeledDataset assemble_2d(const std::vector<arith::TraceVector>& curves,
                           const std::vector<sampler::RandomTraceVector>& random,
                           std::shared_ptr<const encode::TwistBasis> basis, const AssemblyOptions& options) {
  if (!basis) throw std::invalid_argument("assemble_2d: no character basis");
  const std::size_t n = basis->rows();
  if (basis->cols() != n) throw std::invalid_argument("assemble_2d: basis must be square");
  LabeledDataset ds = skeleton(2, n, options.literal_paper_mode);
  ds.basis = basis;
  for (const auto& tv : curves) {
    check_length(tv.values.size(), n, tv.origin);
    ds.rows.push_back(encode::normalized_traces(tv, false));
    for (double z : ds.rows.back())
      if (std::abs(z) > 1.0 + encode::z_tolerance) throw std::domain_error("curve " + tv.origin + " violates the Hasse bound");
    ds.labels.push_back(1);
    ds.provenance.push_back(tv.origin);
  }
  std::uint64_t clamped = 0;
  for (const auto& rv : random) {
    check_length(rv.int_values.size(), n, rv.origin());
    if (options.literal_paper_mode) {
      ds.rows.push_back(rv.tilde_values);
    } else {
      auto tv = rv.as_trace_vector();
      for (std::size_t i = 0; i < n; ++i) clamped += !arith::within_hasse(tv.values[i], tv.primes[i]);
      ds.rows.push_back(encode::normalized_traces(tv, true));
    }
    ds.labels.push_back(0);
    ds.provenance.push_back(rv.origin());
  }
  ds.manifest["curves"] = curves.size();
  ds.manifest["random"] = random.size();
  ds.manifest["hasse_clamped_entries"] = clamped;
  return ds;
}

LabeledDataset assemble_rank(const std::vector<arith::TraceVector>& traces,
                             const std::vector<arith::WeierstrassCurve>& curves,
                             std::shared_ptr<const encode::TwistBasis> basis) {
  if (traces.size() != curves.size()) throw std::invalid_argument("assemble_rank: traces and curves differ in count");
  const std::size_t n = basis->rows();
  LabeledDataset ds = skeleton(2, n, false);
  ds.manifest.erase("random_input");
  ds.basis = basis;
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    if (traces[i].origin != curves[i].label) throw std::invalid_argument("assemble_rank: order mismatch at " + curves[i].label);
    if (curves[i].rank < 0 || curves[i].rank > 2) {
      ++dropped;
      continue;
    }
    check_length(traces[i].values.size(), n, traces[i].origin);
    ds.rows.push_back(encode::normalized_traces(traces[i], false));
    ds.labels.push_back(static_cast<std::uint8_t>(curves[i].rank));
    ds.provenance.push_back(curves[i].label);
  }
  ds.manifest["curves"] = ds.size();
  ds.manifest["dropped_rank_ge_3"] = dropped;
  nlohmann::ordered_json dist;
  for (auto [k, v] : ds.label_counts()) dist[std::to_string(k)] = v;
  ds.manifest["class_distribution"] = dist;
  return ds;
}

std::shared_ptr<const encode::TwistBasis> make_basis(std::size_t n) {
  return std::make_shared<const encode::TwistBasis>(first_primes(n), chars::enumerate_primitive(n));
}

LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b) {
  if (a.spatial_rank != b.spatial_rank || a.extent != b.extent || a.basis.get() != b.basis.get())
    throw std::invalid_argument("concat: incompatible datasets");
  LabeledDataset out = a;
  out.rows.insert(out.rows.end(), b.rows.begin(), b.rows.end());
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  out.provenance.insert(out.provenance.end(), b.provenance.begin(), b.provenance.end());
  return out;
}

std::map<int, std::size_t> train_counts(const std::map<int, std::size_t>& counts, double train_fraction) {
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) throw std::invalid_argument("split: fraction outside [0, 1]");
  std::map<int, std::size_t> out;
  for (auto [label, count] : counts)
    out[label] = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(count)));
  return out;
}

Split split(const LabeledDataset& ds, double train_fraction, std::uint64_t seed) {
  const auto targets = train_counts(ds.label_counts(), train_fraction);
  std::map<int, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < ds.size(); ++i) strata[ds.labels[i]].push_back(i);
  std::vector<std::size_t> train, test;
  const sampler::CounterRng root(seed);
  for (auto& [label, idx] : strata) {
    auto rng = root.split(static_cast<std::uint64_t>(label));
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
    const std::size_t k = targets.at(label);
    train.insert(train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
    test.insert(test.end(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  Split s{ds.subset(train), ds.subset(test)};
  s.train.manifest["split"] = {{"part", "train"}, {"fraction", train_fraction}, {"seed", seed}};
  s.test.manifest["split"] = {{"part", "test"}, {"fraction", train_fraction}, {"seed", seed}};
  return s;
}

bool provenance_disjoint(const LabeledDataset& a, const LabeledDataset& b) {
  std::set<std::string> keys(a.provenance.begin(), a.provenance.end());
  return std::none_of(b.provenance.begin(), b.provenance.end(), [&](const std::string& k) { return keys.count(k) > 0; });
}

}  // namespace twistcnn::harness
