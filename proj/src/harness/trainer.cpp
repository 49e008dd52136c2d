#include "twistcnn/harness/trainer.hpp"

#include <cmath>

#include "twistcnn/nn/checkpoint.hpp"
#include "twistcnn/nn/loss.hpp"

namespace twistcnn::harness {

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t count, std::size_t batch_size, sampler::CounterRng& rng) {
  if (batch_size == 0) throw std::invalid_argument("epoch_batches: zero batch size");
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  for (std::size_t i = count; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < count; start += batch_size)
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(count, start + batch_size)));
  if (batches.size() > 1 && batches.back().size() == 1) {
    batches[batches.size() - 2].push_back(batches.back()[0]);
    batches.pop_back();
  }
  return batches;
}

namespace {

std::size_t outputs_for(Task task) { return task == Task::binary ? 1 : 3; }

double batch_loss(Task task, std::span<const float> logits, std::span<const std::uint8_t> labels, double pos_weight,
                  std::span<float> grad) {
  return task == Task::binary ? nn::weighted_bce_with_logits<float>(logits, labels, pos_weight, grad)
                              : nn::cross_entropy<float>(logits, labels, 3, grad);
}

}  // namespace

std::vector<float> predict(nn::Sequential<float>& model, const LabeledDataset& ds, std::size_t outputs,
                           std::size_t batch_size) {
  std::vector<float> logits;
  logits.reserve(ds.size() * outputs);
  nn::Tensor<float> x;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < ds.size(); start += batch_size) {
    idx.clear();
    for (std::size_t i = start; i < std::min(ds.size(), start + batch_size); ++i) idx.push_back(i);
    ds.materialize(idx, x);
    auto y = model.forward(x, nn::Mode::eval);
    if (y.shape.sample_size() != outputs) throw std::invalid_argument("predict: model emits " + y.shape.str());
    logits.insert(logits.end(), y.data.begin(), y.data.end());
  }
  return logits;
}

MetricsRecord score_logits(std::span<const float> logits, std::span<const std::uint8_t> labels, Task task,
                           double pos_weight) {
  if (labels.empty()) throw std::invalid_argument("evaluate: empty dataset");
  const std::size_t k = outputs_for(task);
  if (logits.size() != labels.size() * k) throw std::invalid_argument("evaluate: logits/labels size mismatch");
  MetricsRecord r;
  r.loss = batch_loss(task, logits, labels, pos_weight, {});
  if (task == Task::binary) {
    r.confusion = ConfusionMatrix(2);
    for (std::size_t i = 0; i < labels.size(); ++i) r.confusion.add(labels[i], logits[i] >= 0.0f ? 1 : 0);
    auto s = binary_scores(r.confusion);
    r.precision = s.precision;
    r.recall = s.recall;
    r.f1 = s.f1;
  } else {
    r.confusion = ConfusionMatrix(3);
    for (std::size_t i = 0; i < labels.size(); ++i) r.confusion.add(labels[i], nn::argmax<float>(logits.subspan(i * 3, 3)));
    auto s = macro_scores(r.confusion);
    r.precision = s.precision;
    r.recall = s.recall;
    r.f1 = s.f1;
  }
  r.accuracy = r.confusion.accuracy();
  return r;
}

MetricsRecord evaluate(nn::Sequential<float>& model, const LabeledDataset& ds, Task task, double pos_weight,
                       std::size_t batch_size) {
  if (ds.size() == 0) throw std::invalid_argument("evaluate: empty dataset");
  auto logits = predict(model, ds, outputs_for(task), batch_size);
  return score_logits(logits, ds.labels, task, pos_weight);
}

std::vector<MetricsRecord> train_loop(nn::Sequential<float>& model, const nn::ModelSpec& spec,
                                      const LabeledDataset& train, const LabeledDataset& test,
                                      const TrainConfig& config) {
  std::vector<MetricsRecord> history;
  if (config.epochs == 0) return history;
  if (train.size() < 2) throw std::invalid_argument("train_loop: need at least two training samples");
  if (spec.input_shape(1) != train.batch_shape(1))
    throw std::invalid_argument("train_loop: model input " + spec.input_shape(1).str() + " vs data " +
                                train.batch_shape(1).str());
  if (spec.outputs != outputs_for(config.task)) throw std::invalid_argument("train_loop: head size does not match task");

  nn::Adam<float> adam(model.params(), config.adam);
  const sampler::CounterRng root(config.seed);
  std::filesystem::path last_checkpoint;
  nn::Tensor<float> x;
  std::vector<std::uint8_t> labels;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    auto rng = root.split(epoch);
    auto batches = epoch_batches(train.size(), config.batch_size, rng);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const auto& idx = batches[b];
      train.materialize(idx, x);
      labels.clear();
      for (auto i : idx) labels.push_back(train.labels[i]);
      model.zero_grad();
      auto y = model.forward(x, nn::Mode::train);
      nn::Tensor<float> g(y.shape);
      const double loss = batch_loss(config.task, y.data, labels, config.pos_weight, g.data);
      auto diverged = [&](const std::string& what) {
        return TrainingDiverged(what + " at epoch " + std::to_string(epoch) + ", batch " + std::to_string(b) +
                                (last_checkpoint.empty() ? std::string(" (no checkpoint written yet)")
                                                         : "; last checkpoint: " + last_checkpoint.string()));
      };
      if (!std::isfinite(loss)) throw diverged("non-finite loss");
      model.backward(g);
      try {
        adam.step();
      } catch (const nn::NumericalError& e) {
        throw diverged(e.what());
      }
      if (config.on_batch) config.on_batch(epoch, b, batches.size(), loss);
    }
    for (const auto* part : {&train, &test}) {
      if (part->size() == 0) continue;
      MetricsRecord r = evaluate(model, *part, config.task, config.pos_weight, config.batch_size);
      r.epoch = static_cast<int>(epoch);
      r.split = part == &train ? "train" : "test";
      if (config.on_record) config.on_record(r);
      history.push_back(std::move(r));
    }
    if (!config.checkpoint_dir.empty()) {
      std::filesystem::create_directories(config.checkpoint_dir);
      last_checkpoint = config.checkpoint_dir / "last.ckpt";
      nn::save_checkpoint(last_checkpoint, spec, model, &adam, "epoch " + std::to_string(epoch));
    }
  }
  return history;
}

std::vector<BandResult> transfer_eval(nn::Sequential<float>& model,
                                      const std::vector<std::pair<std::string, const LabeledDataset*>>& bands,
                                      double pos_weight, std::size_t batch_size) {
  std::vector<BandResult> out;
  for (const auto& [name, ds] : bands) {
    BandResult r{name, evaluate(model, *ds, Task::binary, pos_weight, batch_size)};
    r.metrics.split = name;
    out.push_back(std::move(r));
  }
  return out;
}

std::uint8_t majority_class(const LabeledDataset& train) {
  auto counts = train.label_counts();
  if (counts.empty()) throw std::invalid_argument("majority_class: empty dataset");
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it)
    if (it->second > best->second) best = it;
  return static_cast<std::uint8_t>(best->first);
}

double majority_baseline(const LabeledDataset& train, const LabeledDataset& test) {
  if (test.size() == 0) throw std::invalid_argument("majority_baseline: empty test set");
  const auto m = majority_class(train);
  std::size_t hits = 0;
  for (auto l : test.labels) hits += l == m;
  return static_cast<double>(hits) / static_cast<double>(test.size());
}

}  // namespace twistcnn::harness
