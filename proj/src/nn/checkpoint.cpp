#include "twistcnn/nn/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "../binary_io.hpp"

namespace twistcnn::nn {

using namespace twistcnn::io;

std::string spec_to_json(const ModelSpec& s) {
  nlohmann::ordered_json j;
  j["spatial_rank"] = s.spatial_rank;
  j["input_channels"] = s.input_channels;
  j["extent"] = s.extent;
  j["outputs"] = s.outputs;
  j["widths"] = s.widths;
  j["hidden"] = s.hidden;
  j["dropout"] = s.dropout;
  j["bn_eps"] = s.bn_eps;
  j["bn_momentum"] = s.bn_momentum;
  return j.dump();
}

ModelSpec spec_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  ModelSpec s;
  s.spatial_rank = j.at("spatial_rank").get<int>();
  s.input_channels = j.at("input_channels").get<std::size_t>();
  s.extent = j.at("extent").get<std::size_t>();
  s.outputs = j.at("outputs").get<std::size_t>();
  s.widths = j.at("widths").get<std::vector<std::size_t>>();
  s.hidden = j.at("hidden").get<std::size_t>();
  s.dropout = j.at("dropout").get<double>();
  s.bn_eps = j.at("bn_eps").get<double>();
  s.bn_momentum = j.at("bn_momentum").get<double>();
  return s;
}

void save_checkpoint(const std::filesystem::path& path, const ModelSpec& spec, Sequential<float>& model,
                     Adam<float>* adam, const std::string& notes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path.string() + " for writing");
  out.write("CVCK", 4);
  put_u(out, checkpoint_version, 2);
  nlohmann::ordered_json meta;
  meta["model"] = nlohmann::json::parse(spec_to_json(spec));
  meta["notes"] = notes;
  const std::string m = meta.dump();
  put_u(out, m.size(), 4);
  out.write(m.data(), static_cast<std::streamsize>(m.size()));
  put_u(out, model.size(), 4);
  for (std::size_t i = 0; i < model.size(); ++i) {
    auto& layer = model.layer(i);
    const LayerSpec ls = layer.spec();
    put_u(out, static_cast<std::uint8_t>(ls.kind), 1);
    for (auto v : {ls.in, ls.out, ls.kh, ls.kw}) put_u(out, v, 8);
    for (auto v : {ls.eps, ls.momentum, ls.rate}) put_f64(out, v);
    auto params = layer.params();
    put_u(out, params.size(), 4);
    for (auto* p : params) {
      put_u(out, p->value.size(), 8);
      for (float v : p->value) put_f32(out, v);
    }
    auto buffers = layer.buffers();
    put_u(out, buffers.size(), 4);
    for (auto* b : buffers) {
      put_u(out, b->size(), 8);
      for (float v : *b) put_f32(out, v);
    }
    if (auto* d = dynamic_cast<Dropout<float>*>(&layer)) {
      put_u(out, 1, 1);
      put_u(out, d->rng().key(), 8);
      put_u(out, d->rng().stream(), 8);
      put_u(out, d->rng().counter(), 8);
    } else {
      put_u(out, 0, 1);
    }
  }
  put_u(out, adam ? 1 : 0, 1);
  if (adam) {
    put_u(out, adam->steps(), 8);
    const auto& c = adam->config();
    for (auto v : {c.lr, c.beta1, c.beta2, c.eps}) put_f64(out, v);
    for (auto* moments : {&adam->first_moments(), &adam->second_moments()})
      for (const auto& vec : *moments) {
        put_u(out, vec.size(), 8);
        for (double v : vec) put_f64(out, v);
      }
  }
  out.close();
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
  try {
    char magic[4];
    if (!in.read(magic, 4) || std::string(magic, 4) != "CVCK") throw std::runtime_error("bad magic");
    auto version = get_u(in, 2);
    if (version != checkpoint_version) throw std::runtime_error("unsupported version " + std::to_string(version));
    LoadedCheckpoint ck;
    std::string meta(get_u(in, 4), '\0');
    if (!in.read(meta.data(), static_cast<std::streamsize>(meta.size()))) throw std::runtime_error("truncated metadata");
    auto mj = nlohmann::json::parse(meta);
    ck.spec = spec_from_json(mj.at("model").dump());
    ck.notes = mj.value("notes", "");
    const auto layers = get_u(in, 4);
    for (std::uint64_t i = 0; i < layers; ++i) {
      LayerSpec ls;
      ls.kind = static_cast<LayerKind>(get_u(in, 1));
      ls.in = get_u(in, 8);
      ls.out = get_u(in, 8);
      ls.kh = get_u(in, 8);
      ls.kw = get_u(in, 8);
      ls.eps = get_f64(in);
      ls.momentum = get_f64(in);
      ls.rate = get_f64(in);
      auto layer = make_layer<float>(ls);
      auto params = layer->params();
      if (get_u(in, 4) != params.size()) throw std::runtime_error("parameter count mismatch in layer " + std::to_string(i));
      for (auto* p : params) {
        if (get_u(in, 8) != p->value.size()) throw std::runtime_error("parameter size mismatch in layer " + std::to_string(i));
        for (auto& v : p->value) v = get_f32(in);
      }
      auto buffers = layer->buffers();
      if (get_u(in, 4) != buffers.size()) throw std::runtime_error("buffer count mismatch in layer " + std::to_string(i));
      for (auto* b : buffers) {
        if (get_u(in, 8) != b->size()) throw std::runtime_error("buffer size mismatch in layer " + std::to_string(i));
        for (auto& v : *b) v = get_f32(in);
      }
      if (get_u(in, 1)) {
        auto key = get_u(in, 8), stream = get_u(in, 8), counter = get_u(in, 8);
        auto* d = dynamic_cast<Dropout<float>*>(layer.get());
        if (!d) throw std::runtime_error("rng state on a non-dropout layer");
        d->rng() = sampler::CounterRng(key, stream);
        d->rng().set_counter(counter);
      }
      ck.model.add(std::move(layer));
    }
    if (get_u(in, 1)) {
      ck.adam_steps = get_u(in, 8);
      AdamConfig c;
      c.lr = get_f64(in);
      c.beta1 = get_f64(in);
      c.beta2 = get_f64(in);
      c.eps = get_f64(in);
      ck.adam_config = c;
      const std::size_t np = ck.model.params().size();
      for (auto* moments : {&ck.adam_m, &ck.adam_v})
        for (std::size_t i = 0; i < np; ++i) {
          std::vector<double> v(get_u(in, 8));
          for (auto& x : v) x = get_f64(in);
          moments->push_back(std::move(v));
        }
    }
    return ck;
  } catch (const std::exception& e) {
    throw std::runtime_error("checkpoint " + path.string() + ": " + e.what());
  }
}

Adam<float> LoadedCheckpoint::make_optimizer() {
  Adam<float> adam(model.params(), adam_config.value_or(AdamConfig{}));
  if (adam_config) {
    if (adam_m.size() != adam.first_moments().size()) throw std::runtime_error("checkpoint: optimizer state mismatch");
    adam.first_moments() = adam_m;
    adam.second_moments() = adam_v;
    adam.set_steps(adam_steps);
  }
  return adam;
}

}  // namespace twistcnn::nn
