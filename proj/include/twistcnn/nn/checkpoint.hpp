#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "twistcnn/nn/adam.hpp"
#include "twistcnn/nn/model.hpp"

namespace twistcnn::nn {

// Layout (little-endian): "CVCK", u16 version, u32 metadata length + UTF-8 JSON metadata
// (model spec and caller notes), u32 layer count, then per layer: kind u8, in/out/kh/kw u64,
// eps/momentum/rate f64, u32 param count, per param (u64 size, binary32 values), u32 buffer
// count, per buffer (u64 size, binary32 values), u8 has-rng [key u64, stream u64, counter u64].
// Then u8 has-adam; if set: steps u64, lr/beta1/beta2/eps f64 and per param the first and
// second moments as (u64 size, binary64 values).
inline constexpr std::uint16_t checkpoint_version = 1;

struct LoadedCheckpoint {
  ModelSpec spec;
  std::string notes;
  Sequential<float> model;
  std::optional<AdamConfig> adam_config;
  std::uint64_t adam_steps = 0;
  std::vector<std::vector<double>> adam_m, adam_v;

  /// Optimizer resuming from the stored moments (a fresh one if none were saved).
  Adam<float> make_optimizer();
};

std::string spec_to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const std::string& json);

void save_checkpoint(const std::filesystem::path& path, const ModelSpec& spec, Sequential<float>& model,
                     Adam<float>* adam = nullptr, const std::string& notes = {});
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace twistcnn::nn
