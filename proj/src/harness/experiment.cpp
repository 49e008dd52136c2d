#include "twistcnn/harness/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "twistcnn/nn/adam.hpp"
#include "twistcnn/nn/loss.hpp"

namespace twistcnn::harness {

std::vector<arith::WeierstrassCurve> ingest_curves(const std::vector<arith::WeierstrassCurve>& table, std::int64_t lo,
                                                   std::int64_t hi, bool exclude_cm, IngestReport* report) {
  IngestReport r;
  std::vector<arith::WeierstrassCurve> kept;
  for (const auto& c : table) {
    ++r.read;
    if (c.conductor < lo || c.conductor > hi) {
      ++r.out_of_band;
      continue;
    }
    if (arith::discriminant(c) == 0) throw std::runtime_error("ingest: " + c.label + " is singular");
    if (!arith::conductor_consistent(c))
      throw std::runtime_error("ingest: discriminant of " + c.label + " does not match conductor " +
                               std::to_string(c.conductor));
    if (exclude_cm && arith::is_cm(c)) {
      ++r.cm_excluded;
      continue;
    }
    kept.push_back(c);
  }
  r.kept = kept.size();
  if (report) *report = r;
  return kept;
}

CurveBand load_band(const std::filesystem::path& csv, std::int64_t lo, std::int64_t hi, std::size_t n, bool exclude_cm,
                    unsigned threads) {
  CurveBand band;
  band.curves = ingest_curves(arith::read_curves_csv(csv.string()), lo, hi, exclude_cm, &band.report);
  band.traces = arith::trace_vectors(band.curves, n, threads);
  return band;
}

sampler::RandomDataset training_random(const ExperimentConfig& config) {
  return sampler::random_dataset(config.random_count, config.n, config.seed, config.threads, 0);
}

sampler::RandomDataset transfer_random(const ExperimentConfig& config, std::size_t training_curves,
                                       std::size_t band_curves) {
  std::size_t count = config.transfer_random_count;
  if (count == 0) {
    if (training_curves == 0) throw std::invalid_argument("transfer_random: no training curves to take the ratio from");
    count = static_cast<std::size_t>(std::llround(static_cast<double>(band_curves) *
                                                  static_cast<double>(config.random_count) /
                                                  static_cast<double>(training_curves)));
  }
  return sampler::random_dataset(count, config.n, config.seed, config.threads, transfer_stream_offset);
}

nlohmann::ordered_json decisions_json(const ExperimentConfig& c) {
  nlohmann::ordered_json d;
  d["conv_padding"] = "1 (same extent)";
  d["pooling"] = "window 2, stride 2, floor on odd extents";
  d["weight_init"] = "Kaiming normal (fan-in), zero bias, gamma 1, beta 0";
  d["adam"] = {{"lr", c.lr}, {"beta1", c.beta1}, {"beta2", c.beta2}, {"eps", c.adam_eps}};
  d["batch_norm"] = {{"eps", c.bn_eps}, {"momentum", c.bn_momentum}, {"running_variance", "unbiased"}};
  d["batch_size"] = c.batch_size;
  d["compute_precision"] = "binary32";
  d["positive_class"] = "genuine curves (label 1)";
  d["decision_threshold"] = "logit >= 0";
  d["pos_weight"] = c.pos_weight;
  d["split"] = "stratified by label";
  d["rank_filter"] = "rank <= 2";
  d["cm_curves"] = c.exclude_cm ? "excluded" : "kept";
  d["random_input_1d"] = c.literal_paper_mode ? "x_tilde (literal)" : "integer x_p, clamped to the Hasse bound";
  d["random_input_2d"] = c.literal_paper_mode ? "x_tilde (literal)" : "x_p / (2 sqrt p), clamped to [-1, 1]";
  d["saliency_target"] = c.saliency_target;
  return d;
}

nlohmann::ordered_json run_manifest(const ExperimentConfig& config, const std::string& command) {
  nlohmann::ordered_json m;
  m["command"] = command;
  m["config"] = config.to_json();
  m["decisions"] = decisions_json(config);
  m["datasets"] = nlohmann::ordered_json::object();
  return m;
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

namespace {

nlohmann::ordered_json describe(const LabeledDataset& ds) {
  nlohmann::ordered_json j;
  j["size"] = ds.size();
  nlohmann::ordered_json counts;
  for (auto [k, v] : ds.label_counts()) counts[std::to_string(k)] = v;
  j["label_counts"] = counts;
  j["sha256"] = ds.digest();
  return j;
}

LabeledDataset assemble(const ExperimentConfig& config, int spatial_rank, const std::vector<arith::TraceVector>& curves,
                        const std::vector<sampler::RandomTraceVector>& random) {
  AssemblyOptions opt{config.literal_paper_mode};
  if (spatial_rank == 1) return assemble_1d(curves, random, config.n, opt);
  return assemble_2d(curves, random, make_basis(config.n), opt);
}

}  // namespace

BinaryData build_binary_data(const ExperimentConfig& config, int spatial_rank) {
  BinaryData d;
  d.band = load_band(config.curves_csv, config.conductor_min, config.conductor_max, config.n, config.exclude_cm,
                     config.threads);
  auto random = training_random(config);
  d.random_stats = random.stats;
  d.all = assemble(config, spatial_rank, d.band.traces, random.vectors);
  d.parts = split(d.all, config.train_fraction, config.seed);
  d.manifest["ingest"] = {{"read", d.band.report.read},
                          {"kept", d.band.report.kept},
                          {"cm_excluded", d.band.report.cm_excluded},
                          {"out_of_band", d.band.report.out_of_band}};
  d.manifest["random"] = {{"count", random.vectors.size()},
                          {"proposals", random.stats.proposals},
                          {"accepted", random.stats.accepted},
                          {"hasse_exceedances", random.stats.hasse_exceedances}};
  d.manifest["assembly"] = d.all.manifest;
  d.manifest["all"] = describe(d.all);
  d.manifest["train"] = describe(d.parts.train);
  d.manifest["test"] = describe(d.parts.test);
  return d;
}

TransferData build_transfer_data(const ExperimentConfig& config, int spatial_rank, std::size_t training_curves) {
  TransferData d;
  d.band = load_band(config.curves_csv, config.transfer_conductor_min, config.transfer_conductor_max, config.n,
                     config.exclude_cm, config.threads);
  auto random = transfer_random(config, training_curves, d.band.curves.size());
  d.all = assemble(config, spatial_rank, d.band.traces, random.vectors);
  d.manifest["conductor_band"] = {config.transfer_conductor_min, config.transfer_conductor_max};
  d.manifest["random_first_index"] = transfer_stream_offset;
  d.manifest["dataset"] = describe(d.all);
  return d;
}

RankData build_rank_data(const ExperimentConfig& config) {
  RankData d;
  d.band = load_band(config.curves_csv, config.conductor_min, config.conductor_max, config.n, config.exclude_cm,
                     config.threads);
  d.all = assemble_rank(d.band.traces, d.band.curves, make_basis(config.n));
  d.parts = split(d.all, config.train_fraction, config.seed);
  d.manifest["assembly"] = d.all.manifest;
  d.manifest["train"] = describe(d.parts.train);
  d.manifest["test"] = describe(d.parts.test);
  return d;
}

RuntimeProjection project_runtime(const nn::ModelSpec& spec, std::size_t train_size, std::size_t test_size,
                                  std::size_t epochs, std::size_t batch_size, std::size_t probe_batches) {
  using clock = std::chrono::steady_clock;
  auto model = nn::build_classifier<float>(spec, 0);
  nn::Adam<float> adam(model.params());
  nn::Tensor<float> x(spec.input_shape(batch_size));
  for (std::size_t i = 0; i < x.size(); ++i) x.data[i] = static_cast<float>(0.5 + 0.4 * std::sin(0.7 * static_cast<double>(i)));
  std::vector<std::uint8_t> labels(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) labels[i] = static_cast<std::uint8_t>(i % (spec.outputs == 1 ? 2 : 3));
  auto step = [&] {
    model.zero_grad();
    auto y = model.forward(x, nn::Mode::train);
    nn::Tensor<float> g(y.shape);
    if (spec.outputs == 1) nn::weighted_bce_with_logits<float>(y.data, labels, 3.0, g.data);
    else nn::cross_entropy<float>(y.data, labels, spec.outputs, g.data);
    model.backward(g);
    adam.step();
  };
  step();  // warm-up: allocations and caches
  auto t0 = clock::now();
  for (std::size_t i = 0; i < probe_batches; ++i) step();
  auto t1 = clock::now();
  model.forward(x, nn::Mode::eval);
  auto t2 = clock::now();
  RuntimeProjection p;
  const double b = static_cast<double>(batch_size);
  p.train_seconds_per_sample = std::chrono::duration<double>(t1 - t0).count() / (b * static_cast<double>(probe_batches));
  p.eval_seconds_per_sample = std::chrono::duration<double>(t2 - t1).count() / b;
  p.projected_seconds = static_cast<double>(epochs) *
                        (static_cast<double>(train_size) * p.train_seconds_per_sample +
                         static_cast<double>(train_size + test_size) * p.eval_seconds_per_sample);
  return p;
}

}  // namespace twistcnn::harness
