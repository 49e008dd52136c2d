#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "twistcnn/harness/saliency.hpp"
#include "twistcnn/harness/trainer.hpp"
#include "twistcnn/nn/model.hpp"

namespace twistcnn::harness {

/// Every knob of an experiment, including the choices the method description leaves open.
/// Stored as flat "key = value" text; '#' starts a comment.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::size_t n = 100;
  std::string curves_csv = "data/cremona_conductor_le_3000.csv";
  std::int64_t conductor_min = 1, conductor_max = 2000;
  std::int64_t transfer_conductor_min = 2001, transfer_conductor_max = 3000;
  bool exclude_cm = true;
  std::size_t random_count = 20000;
  std::size_t transfer_random_count = 0;  // 0: keep the training curve/random ratio
  double train_fraction = 0.8;
  std::size_t epochs = 20;
  std::size_t batch_size = 64;
  double pos_weight = 3.0;
  double lr = 1e-3, beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  double bn_eps = 1e-5, bn_momentum = 0.1;
  double dropout = 0.5;
  std::size_t hidden = 256;
  std::string conv_widths = "64,128,256,512,512";
  bool literal_paper_mode = false;
  std::string saliency_target = "predicted";  // predicted | class:<k> (rank model)
  unsigned threads = 1;
  double runtime_budget_hours = 2.0;

  nn::ModelSpec model_spec(int spatial_rank, std::size_t outputs) const;
  TrainConfig train_config(Task task) const;
  nlohmann::ordered_json to_json() const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);
void write_config(std::ostream& out, const ExperimentConfig& config);
/// Applies one "key=value" assignment; throws std::invalid_argument on unknown keys or bad values.
void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);

}  // namespace twistcnn::harness
