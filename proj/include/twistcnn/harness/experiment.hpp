#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "twistcnn/curve_arith.hpp"
#include "twistcnn/harness/config.hpp"
#include "twistcnn/harness/dataset.hpp"
#include "twistcnn/sampler.hpp"

namespace twistcnn::harness {

struct IngestReport {
  std::size_t read = 0, kept = 0, out_of_band = 0, cm_excluded = 0;
};

/// Keeps curves with conductor in [lo, hi]; every kept curve must be non-singular and its
/// discriminant must have exactly the conductor's prime divisors (std::runtime_error otherwise).
/// CM curves are dropped when `exclude_cm`.
std::vector<arith::WeierstrassCurve> ingest_curves(const std::vector<arith::WeierstrassCurve>& table, std::int64_t lo,
                                                   std::int64_t hi, bool exclude_cm, IngestReport* report = nullptr);

struct CurveBand {
  std::vector<arith::WeierstrassCurve> curves;
  std::vector<arith::TraceVector> traces;
  IngestReport report;
};

CurveBand load_band(const std::filesystem::path& csv, std::int64_t lo, std::int64_t hi, std::size_t n, bool exclude_cm,
                    unsigned threads);

/// Sub-stream offset of the random vectors used for transfer evaluation, far past any training index.
inline constexpr std::uint64_t transfer_stream_offset = std::uint64_t{1} << 40;

sampler::RandomDataset training_random(const ExperimentConfig& config);
/// Fresh vectors (disjoint provenance) for a transfer band holding `band_curves` curves.
sampler::RandomDataset transfer_random(const ExperimentConfig& config, std::size_t training_curves,
                                       std::size_t band_curves);

/// Modelling decisions in force, for run manifests.
nlohmann::ordered_json decisions_json(const ExperimentConfig& config);
nlohmann::ordered_json run_manifest(const ExperimentConfig& config, const std::string& command);
void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j);

/// Curves of the training band against the configured random vectors, split 80:20.
struct BinaryData {
  CurveBand band;
  sampler::RandomDatasetStats random_stats;
  LabeledDataset all;
  Split parts;
  nlohmann::ordered_json manifest;  // sizes, label counts, digests
};
BinaryData build_binary_data(const ExperimentConfig& config, int spatial_rank);

/// Unseen curves of the transfer band plus fresh random vectors.
struct TransferData {
  CurveBand band;
  LabeledDataset all;
  nlohmann::ordered_json manifest;
};
TransferData build_transfer_data(const ExperimentConfig& config, int spatial_rank, std::size_t training_curves);

/// Training-band curves labelled by rank, split 80:20.
struct RankData {
  CurveBand band;
  LabeledDataset all;
  Split parts;
  nlohmann::ordered_json manifest;
};
RankData build_rank_data(const ExperimentConfig& config);

struct RuntimeProjection {
  double train_seconds_per_sample = 0.0;
  double eval_seconds_per_sample = 0.0;
  double projected_seconds = 0.0;  // epochs x (train pass + evaluation of both splits)
};

/// Times `probe_batches` optimisation steps and one evaluation batch of the given model on
/// synthetic input, then extrapolates to a full run.
RuntimeProjection project_runtime(const nn::ModelSpec& spec, std::size_t train_size, std::size_t test_size,
                                  std::size_t epochs, std::size_t batch_size, std::size_t probe_batches = 2);

}  // namespace twistcnn::harness
