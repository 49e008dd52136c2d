#include "twistcnn/harness/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace twistcnn::harness {
namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw std::invalid_argument("config: bad value '" + v + "' for " + key);
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config: bad boolean '" + v + "' for " + key);
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

template <typename T>
Setter number(T ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, const std::string& k, const std::string& v) { c.*field = parse_number<T>(k, v); };
}

Setter flag(bool ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, const std::string& k, const std::string& v) { c.*field = parse_bool(k, v); };
}

Setter text(std::string ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, const std::string&, const std::string& v) { c.*field = v; };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"seed", number(&ExperimentConfig::seed)},
      {"n", number(&ExperimentConfig::n)},
      {"curves_csv", text(&ExperimentConfig::curves_csv)},
      {"conductor_min", number(&ExperimentConfig::conductor_min)},
      {"conductor_max", number(&ExperimentConfig::conductor_max)},
      {"transfer_conductor_min", number(&ExperimentConfig::transfer_conductor_min)},
      {"transfer_conductor_max", number(&ExperimentConfig::transfer_conductor_max)},
      {"exclude_cm", flag(&ExperimentConfig::exclude_cm)},
      {"random_count", number(&ExperimentConfig::random_count)},
      {"transfer_random_count", number(&ExperimentConfig::transfer_random_count)},
      {"train_fraction", number(&ExperimentConfig::train_fraction)},
      {"epochs", number(&ExperimentConfig::epochs)},
      {"batch_size", number(&ExperimentConfig::batch_size)},
      {"pos_weight", number(&ExperimentConfig::pos_weight)},
      {"lr", number(&ExperimentConfig::lr)},
      {"beta1", number(&ExperimentConfig::beta1)},
      {"beta2", number(&ExperimentConfig::beta2)},
      {"adam_eps", number(&ExperimentConfig::adam_eps)},
      {"bn_eps", number(&ExperimentConfig::bn_eps)},
      {"bn_momentum", number(&ExperimentConfig::bn_momentum)},
      {"dropout", number(&ExperimentConfig::dropout)},
      {"hidden", number(&ExperimentConfig::hidden)},
      {"conv_widths", text(&ExperimentConfig::conv_widths)},
      {"literal_paper_mode", flag(&ExperimentConfig::literal_paper_mode)},
      {"saliency_target", text(&ExperimentConfig::saliency_target)},
      {"threads", number(&ExperimentConfig::threads)},
      {"runtime_budget_hours", number(&ExperimentConfig::runtime_budget_hours)},
  };
  return table;
}

std::vector<std::size_t> parse_widths(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<std::size_t>("conv_widths", trim(item)));
  if (out.empty()) throw std::invalid_argument("config: conv_widths is empty");
  return out;
}

}  // namespace

void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value) {
  auto it = setters().find(key);
  if (it == setters().end()) throw std::invalid_argument("config: unknown key '" + key + "'");
  it->second(config, key, value);
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    set_config_value(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  parse_widths(c.conv_widths);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  return parse_config(in);
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["n"] = n;
  j["curves_csv"] = curves_csv;
  j["conductor_min"] = conductor_min;
  j["conductor_max"] = conductor_max;
  j["transfer_conductor_min"] = transfer_conductor_min;
  j["transfer_conductor_max"] = transfer_conductor_max;
  j["exclude_cm"] = exclude_cm;
  j["random_count"] = random_count;
  j["transfer_random_count"] = transfer_random_count;
  j["train_fraction"] = train_fraction;
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["pos_weight"] = pos_weight;
  j["lr"] = lr;
  j["beta1"] = beta1;
  j["beta2"] = beta2;
  j["adam_eps"] = adam_eps;
  j["bn_eps"] = bn_eps;
  j["bn_momentum"] = bn_momentum;
  j["dropout"] = dropout;
  j["hidden"] = hidden;
  j["conv_widths"] = conv_widths;
  j["literal_paper_mode"] = literal_paper_mode;
  j["saliency_target"] = saliency_target;
  j["threads"] = threads;
  j["runtime_budget_hours"] = runtime_budget_hours;
  return j;
}

void write_config(std::ostream& out, const ExperimentConfig& config) {
  out.precision(17);
  const auto j = config.to_json();
  for (auto& [key, value] : j.items()) {
    out << key << " = ";
    if (value.is_string()) out << value.get<std::string>();
    else out << value.dump();
    out << '\n';
  }
}

nn::ModelSpec ExperimentConfig::model_spec(int spatial_rank, std::size_t outputs) const {
  nn::ModelSpec s;
  s.spatial_rank = spatial_rank;
  s.input_channels = spatial_rank == 2 ? 2 : 1;
  s.extent = n;
  s.outputs = outputs;
  s.widths = parse_widths(conv_widths);
  s.hidden = hidden;
  s.dropout = dropout;
  s.bn_eps = bn_eps;
  s.bn_momentum = bn_momentum;
  return s;
}

TrainConfig ExperimentConfig::train_config(Task task) const {
  TrainConfig t;
  t.epochs = epochs;
  t.batch_size = batch_size;
  t.pos_weight = pos_weight;
  t.adam = {lr, beta1, beta2, adam_eps};
  t.seed = seed;
  t.task = task;
  return t;
}

}  // namespace twistcnn::harness
