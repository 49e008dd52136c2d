#pragma once

#include <filesystem>
#include <functional>
#include <stdexcept>
#include <vector>

#include "twistcnn/harness/dataset.hpp"
#include "twistcnn/harness/metrics.hpp"
#include "twistcnn/nn/adam.hpp"
#include "twistcnn/nn/model.hpp"

namespace twistcnn::harness {

enum class Task { binary, rank };

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 64;
  double pos_weight = 3.0;  // weight of the genuine-curve class in the binary loss
  nn::AdamConfig adam;
  std::uint64_t seed = 0;   // batch order
  Task task = Task::binary;
  std::filesystem::path checkpoint_dir;  // end-of-epoch checkpoints when non-empty
  /// Called after every optimisation step with (epoch, batch index, batches per epoch, loss).
  std::function<void(std::size_t, std::size_t, std::size_t, double)> on_batch;
  std::function<void(const MetricsRecord&)> on_record;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shuffled mini-batches of [0, count). A trailing batch of one sample is merged into the
/// previous batch, since batch normalisation cannot train on a single sample.
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t count, std::size_t batch_size, sampler::CounterRng& rng);

/// Runs `config.epochs` epochs of Adam on `train`; after each epoch both splits are evaluated
/// (eval mode) and one record per split is appended. A non-finite loss or gradient throws
/// TrainingDiverged naming the last good checkpoint.
std::vector<MetricsRecord> train_loop(nn::Sequential<float>& model, const nn::ModelSpec& spec,
                                      const LabeledDataset& train, const LabeledDataset& test,
                                      const TrainConfig& config);

/// Eval-mode logits, row-major (samples, outputs).
std::vector<float> predict(nn::Sequential<float>& model, const LabeledDataset& ds, std::size_t outputs,
                           std::size_t batch_size = 64);

/// Binary: predicted positive iff logit >= 0; scores on class 1. Rank: argmax, macro scores and
/// accuracy. Throws std::invalid_argument on an empty dataset.
MetricsRecord evaluate(nn::Sequential<float>& model, const LabeledDataset& ds, Task task, double pos_weight = 3.0,
                       std::size_t batch_size = 64);

/// Metrics from given logits (the part of evaluate() that does not touch the model).
MetricsRecord score_logits(std::span<const float> logits, std::span<const std::uint8_t> labels, Task task,
                           double pos_weight);

struct BandResult {
  std::string name;
  MetricsRecord metrics;
};

/// Binary metrics (with confusion matrix) of a trained model on each named evaluation set.
std::vector<BandResult> transfer_eval(nn::Sequential<float>& model,
                                      const std::vector<std::pair<std::string, const LabeledDataset*>>& bands,
                                      double pos_weight = 3.0, std::size_t batch_size = 64);

/// Most frequent label of `train` (smallest label on ties).
std::uint8_t majority_class(const LabeledDataset& train);
/// Accuracy on `test` of always predicting the majority class of `train`.
double majority_baseline(const LabeledDataset& train, const LabeledDataset& test);

}  // namespace twistcnn::harness
