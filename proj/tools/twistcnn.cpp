// Command-line front end: data generation, dataset export, training, evaluation, saliency, rendering.
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "twistcnn/characters.hpp"
#include "twistcnn/curve_arith.hpp"
#include "twistcnn/encode.hpp"
#include "twistcnn/harness/config.hpp"
#include "twistcnn/harness/experiment.hpp"
#include "twistcnn/harness/saliency.hpp"
#include "twistcnn/harness/trainer.hpp"
#include "twistcnn/nn/checkpoint.hpp"
#include "twistcnn/sampler.hpp"

namespace fs = std::filesystem;
using namespace twistcnn;
using namespace twistcnn::harness;

namespace {

struct Globals {
  std::string config_path;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::string out = "out";
  bool literal = false;
};

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

void log(const std::string& msg) { std::cerr << msg << std::endl; }

std::string model_tag(int rank) { return rank == 2 ? "2d" : "1d"; }

TrainConfig with_progress(TrainConfig cfg) {
  auto start = std::make_shared<std::chrono::steady_clock::time_point>(std::chrono::steady_clock::now());
  cfg.on_batch = [start](std::size_t epoch, std::size_t b, std::size_t batches, double loss) {
    if ((b + 1) % 50 != 0 && b + 1 != batches) return;
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - *start).count();
    std::cerr << "epoch " << epoch << " batch " << b + 1 << "/" << batches << " loss " << loss << " elapsed "
              << static_cast<long>(elapsed) << "s" << std::endl;
  };
  cfg.on_record = [](const MetricsRecord& r) {
    std::cerr << "epoch " << r.epoch << " " << r.split << ": loss " << r.loss << " precision " << r.precision
              << " recall " << r.recall << " f1 " << r.f1 << " accuracy " << r.accuracy << std::endl;
  };
  return cfg;
}

void write_records(const fs::path& dir, const std::string& stem, const std::vector<MetricsRecord>& records) {
  auto m = open_out(dir / (stem + "_metrics.csv"));
  write_metrics_csv(m, records);
  auto c = open_out(dir / (stem + "_confusion.csv"));
  write_confusion_csv(c, records);
  auto a = open_out(dir / (stem + "_accuracy.csv"));
  write_accuracy_csv(a, records);
}

// Line chart of train/test F1 (or accuracy) per epoch; test in black, train in mid grey.
encode::Image metrics_chart(const fs::path& csv) {
  std::ifstream in(csv);
  if (!in) throw std::runtime_error("cannot open " + csv.string());
  std::string line;
  std::getline(in, line);
  const bool accuracy = line.find("accuracy") != std::string::npos && line.find("f1") == std::string::npos;
  std::map<std::string, std::vector<std::pair<int, double>>> series;
  int max_epoch = 1;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (f.size() < 3) continue;
    int epoch = std::stoi(f[0]);
    double value = std::stod(accuracy ? f[2] : f.at(5));
    series[f[1]].emplace_back(epoch, value);
    max_epoch = std::max(max_epoch, epoch);
  }
  encode::Image img{400, 300, 1, std::vector<std::uint8_t>(400 * 300, 255)};
  const int left = 30, bottom = 270, width = 360, height = 250;
  auto plot = [&](int x, int y, std::uint8_t v) {
    if (x >= 0 && x < 400 && y >= 0 && y < 300) img.pixels[static_cast<std::size_t>(y) * 400 + x] = v;
  };
  for (int x = left; x <= left + width; ++x) plot(x, bottom, 0);
  for (int y = bottom - height; y <= bottom; ++y) plot(left, y, 0);
  for (int k = 1; k <= 4; ++k)
    for (int x = left; x <= left + width; x += 4) plot(x, bottom - height * k / 4, 200);
  for (const auto& [name, pts] : series) {
    std::uint8_t shade = name == "train" ? 128 : 0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      auto px = [&](const std::pair<int, double>& p) {
        return std::pair<double, double>{left + width * (p.first - 1.0) / std::max(1, max_epoch - 1),
                                         bottom - height * std::clamp(p.second, 0.0, 1.0)};
      };
      auto [x0, y0] = px(pts[i]);
      auto [x1, y1] = px(pts[i + 1]);
      int steps = static_cast<int>(std::max(std::abs(x1 - x0), std::abs(y1 - y0))) + 1;
      for (int s = 0; s <= steps; ++s) {
        double t = static_cast<double>(s) / steps;
        plot(static_cast<int>(std::lround(x0 + t * (x1 - x0))), static_cast<int>(std::lround(y0 + t * (y1 - y0))), shade);
      }
    }
  }
  return img;
}

encode::Image render_sample(const encode::CvtfDataset& ds, std::size_t index) {
  if (index >= ds.count()) throw std::out_of_range("render: sample index out of range");
  auto s = ds.sample(index);
  if (ds.shape.channels == 2) {
    encode::TwistField f;
    f.rows = ds.shape.rows;
    f.cols = ds.shape.cols;
    const std::size_t plane = f.rows * f.cols;
    f.red.assign(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(plane));
    f.blue.assign(s.begin() + static_cast<std::ptrdiff_t>(plane), s.end());
    return encode::quantize(f);
  }
  std::vector<double> v(s.begin(), s.end());
  double lo = *std::min_element(v.begin(), v.end());
  for (auto& x : v) x -= lo;
  return encode::heatmap(v, ds.shape.rows, ds.shape.cols);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Twisted Frobenius-trace fields: data generation and CNN experiments"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "key = value configuration file");
  app.add_option("--seed", g.seed, "override the configured seed");
  app.add_option("--n", g.n, "number of primes and characters")->check(CLI::IsMember({100, 200, 300}));
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_flag("--literal-paper-mode", g.literal, "random vectors enter as continuous x~_p");

  auto config = [&] {
    ExperimentConfig c = g.config_path.empty() ? ExperimentConfig{} : load_config(g.config_path);
    if (g.seed) c.seed = g.seed;
    if (g.n) c.n = g.n;
    if (g.literal) c.literal_paper_mode = true;
    return c;
  };
  auto finish = [&](const ExperimentConfig& c, const std::string& command, nlohmann::ordered_json extra) {
    auto m = run_manifest(c, command);
    for (auto& [k, v] : extra.items()) m[k] = v;
    write_json(fs::path(g.out) / ("manifest_" + command + ".json"), m);
    auto cfg = open_out(fs::path(g.out) / "config_used.txt");
    write_config(cfg, c);
  };

  // ingest-curves
  auto* ingest = app.add_subcommand("ingest-curves", "filter and check a curve table");
  std::string ingest_input;
  std::int64_t cmin = 0, cmax = 0;
  ingest->add_option("--input", ingest_input, "curve table CSV (default: configured curves_csv)");
  ingest->add_option("--min-conductor", cmin);
  ingest->add_option("--max-conductor", cmax);
  ingest->callback([&] {
    auto c = config();
    IngestReport r;
    auto curves = ingest_curves(arith::read_curves_csv(ingest_input.empty() ? c.curves_csv : ingest_input),
                                cmin ? cmin : c.conductor_min, cmax ? cmax : c.conductor_max, c.exclude_cm, &r);
    auto out = open_out(fs::path(g.out) / "curves.csv");
    arith::write_curves_csv(out, curves);
    log("kept " + std::to_string(r.kept) + " of " + std::to_string(r.read) + " (" + std::to_string(r.cm_excluded) +
        " CM, " + std::to_string(r.out_of_band) + " outside the band)");
    finish(c, "ingest-curves",
           {{"ingest", {{"read", r.read}, {"kept", r.kept}, {"cm_excluded", r.cm_excluded}, {"out_of_band", r.out_of_band}}}});
  });

  // gen-traces
  auto* traces = app.add_subcommand("gen-traces", "Frobenius traces of ingested curves at the first N primes");
  std::string traces_input;
  traces->add_option("--curves", traces_input, "curve CSV (default: <out>/curves.csv)");
  traces->callback([&] {
    auto c = config();
    auto curves = arith::read_curves_csv(traces_input.empty() ? (fs::path(g.out) / "curves.csv").string() : traces_input);
    auto tv = arith::trace_vectors(curves, c.n, c.threads);
    auto out = open_out(fs::path(g.out) / "traces.csv");
    arith::write_traces_csv(out, tv);
    log("wrote " + std::to_string(tv.size()) + " trace vectors of length " + std::to_string(c.n));
    finish(c, "gen-traces", {{"curves", curves.size()}});
  });

  // gen-random
  auto* random = app.add_subcommand("gen-random", "Sato-Tate surrogate trace vectors");
  std::size_t random_count = 0;
  std::uint64_t first_index = 0;
  random->add_option("--count", random_count, "number of vectors (default: configured random_count)");
  random->add_option("--first-index", first_index, "first sub-stream index");
  random->callback([&] {
    auto c = config();
    auto ds = sampler::random_dataset(random_count ? random_count : c.random_count, c.n, c.seed, c.threads, first_index);
    std::vector<arith::TraceVector> tv;
    for (const auto& v : ds.vectors) tv.push_back(v.as_trace_vector());
    auto out = open_out(fs::path(g.out) / "random_traces.csv");
    arith::write_traces_csv(out, tv);
    auto tilde = open_out(fs::path(g.out) / "random_tilde.csv");
    tilde.precision(17);
    tilde << "origin";
    for (std::size_t i = 0; i < c.n; ++i) tilde << ',' << (ds.vectors.empty() ? 0 : ds.vectors[0].primes[i]);
    tilde << '\n';
    for (const auto& v : ds.vectors) {
      tilde << v.origin();
      for (double x : v.tilde_values) tilde << ',' << x;
      tilde << '\n';
    }
    auto man = open_out(fs::path(g.out) / "random_manifest.json");
    sampler::write_manifest(man, ds);
    log("wrote " + std::to_string(ds.vectors.size()) + " random vectors");
    finish(c, "gen-random", {{"count", ds.vectors.size()}, {"first_index", first_index}});
  });

  // build-1d / build-2d
  for (int rank : {1, 2}) {
    auto* build = app.add_subcommand("build-" + model_tag(rank),
                                     rank == 1 ? "export the 1-d trace dataset as CVTF"
                                               : "export the 2-d twist-field dataset as CVTF");
    build->callback([&, rank] {
      auto c = config();
      auto data = build_binary_data(c, rank);
      const auto& ds = data.all;
      encode::CvtfShape shape{static_cast<std::uint16_t>(ds.channels()),
                              static_cast<std::uint16_t>(rank == 2 ? c.n : 1), static_cast<std::uint16_t>(c.n)};
      auto path = fs::path(g.out) / ("dataset_" + model_tag(rank) + ".cvtf");
      fs::create_directories(g.out);
      encode::CvtfWriter writer(path, ds.size(), shape);
      nn::Tensor<float> x;
      for (std::size_t i = 0; i < ds.size(); ++i) {
        std::vector<std::size_t> one{i};
        ds.materialize(one, x);
        writer.add(x.data, ds.labels[i]);
      }
      writer.close();
      auto prov = open_out(fs::path(g.out) / ("dataset_" + model_tag(rank) + "_provenance.csv"));
      prov << "index,label,origin\n";
      for (std::size_t i = 0; i < ds.size(); ++i) prov << i << ',' << int(ds.labels[i]) << ',' << ds.provenance[i] << '\n';
      log("wrote " + path.string() + " with " + std::to_string(ds.size()) + " samples");
      finish(c, "build-" + model_tag(rank), data.manifest);
    });
  }

  // train
  auto* train = app.add_subcommand("train", "train the binary curve/random classifier");
  std::string train_model = "2d";
  bool project_only = false;
  train->add_option("--model", train_model)->check(CLI::IsMember({"1d", "2d"}))->capture_default_str();
  train->add_flag("--project-only", project_only, "print the projected runtime and stop");
  train->callback([&] {
    auto c = config();
    const int rank = train_model == "2d" ? 2 : 1;
    auto data = build_binary_data(c, rank);
    auto spec = c.model_spec(rank, 1);
    auto proj = project_runtime(spec, data.parts.train.size(), data.parts.test.size(), c.epochs, c.batch_size);
    log("train " + std::to_string(data.parts.train.size()) + " / test " + std::to_string(data.parts.test.size()) +
        "; projected runtime " + std::to_string(proj.projected_seconds / 3600.0) + " h");
    if (project_only) return;
    auto model = nn::build_classifier<float>(spec, c.seed);
    auto tc = with_progress(c.train_config(Task::binary));
    tc.checkpoint_dir = fs::path(g.out) / ("checkpoints_" + train_model);
    auto history = train_loop(model, spec, data.parts.train, data.parts.test, tc);
    write_records(g.out, "train_" + train_model, history);
    nn::save_checkpoint(fs::path(g.out) / ("model_" + train_model + ".ckpt"), spec, model, nullptr,
                        "binary classifier, seed " + std::to_string(c.seed));
    data.manifest["projected_seconds"] = proj.projected_seconds;
    finish(c, "train", data.manifest);
  });

  auto load_model = [&](const std::string& path, std::size_t outputs) {
    auto ck = nn::load_checkpoint(path);
    if (ck.spec.outputs != outputs) throw std::runtime_error(path + ": model has " + std::to_string(ck.spec.outputs) + " outputs");
    return ck;
  };

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "evaluate a binary checkpoint on the held-out split");
  std::string eval_ckpt;
  eval->add_option("--checkpoint", eval_ckpt)->required();
  eval->callback([&] {
    auto c = config();
    auto ck = load_model(eval_ckpt, 1);
    auto data = build_binary_data(c, ck.spec.spatial_rank);
    auto r = evaluate(ck.model, data.parts.test, Task::binary, c.pos_weight, c.batch_size);
    r.split = "test";
    write_records(g.out, "evaluate", {r});
    std::cout << "precision " << r.precision << " recall " << r.recall << " f1 " << r.f1 << "\n";
    finish(c, "evaluate", data.manifest);
  });

  // transfer-eval
  auto* transfer = app.add_subcommand("transfer-eval", "evaluate a binary checkpoint on the higher conductor band");
  std::string transfer_ckpt;
  transfer->add_option("--checkpoint", transfer_ckpt)->required();
  transfer->callback([&] {
    auto c = config();
    auto ck = load_model(transfer_ckpt, 1);
    auto base = build_binary_data(c, ck.spec.spatial_rank);
    auto band = build_transfer_data(c, ck.spec.spatial_rank, base.band.curves.size());
    if (!provenance_disjoint(base.all, band.all)) throw std::runtime_error("transfer band overlaps the training data");
    auto results = transfer_eval(ck.model, {{"in_band_test", &base.parts.test}, {"transfer_band", &band.all}}, c.pos_weight,
                                 c.batch_size);
    std::vector<MetricsRecord> records;
    for (auto& r : results) {
      std::cout << r.name << ": precision " << r.metrics.precision << " recall " << r.metrics.recall << " f1 "
                << r.metrics.f1 << "  confusion [tn fp; fn tp] = [" << r.metrics.confusion.at(0, 0) << ' '
                << r.metrics.confusion.at(0, 1) << "; " << r.metrics.confusion.at(1, 0) << ' '
                << r.metrics.confusion.at(1, 1) << "]\n";
      records.push_back(r.metrics);
    }
    write_records(g.out, "transfer", records);
    nlohmann::ordered_json extra{{"training", base.manifest}, {"transfer", band.manifest}};
    finish(c, "transfer-eval", extra);
  });

  // rank
  auto* rank_cmd = app.add_subcommand("rank", "train the 3-class rank model and its saliency map");
  rank_cmd->callback([&] {
    auto c = config();
    auto data = build_rank_data(c);
    auto spec = c.model_spec(2, 3);
    const double baseline = majority_baseline(data.parts.train, data.parts.test);
    log("class distribution " + data.all.manifest["class_distribution"].dump() + ", majority baseline " +
        std::to_string(baseline));
    auto model = nn::build_classifier<float>(spec, c.seed);
    auto tc = with_progress(c.train_config(Task::rank));
    tc.checkpoint_dir = fs::path(g.out) / "checkpoints_rank";
    auto history = train_loop(model, spec, data.parts.train, data.parts.test, tc);
    write_records(g.out, "rank", history);
    nn::save_checkpoint(fs::path(g.out) / "model_rank.ckpt", spec, model, nullptr, "rank classifier");
    SaliencyTarget target = SaliencyTarget::predicted_class;
    std::size_t fixed = 0;
    if (c.saliency_target.rfind("class:", 0) == 0) {
      target = SaliencyTarget::fixed_class;
      fixed = std::stoul(c.saliency_target.substr(6));
    }
    std::vector<std::size_t> all(data.parts.test.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    auto map = saliency(model, data.parts.test, all, target, fixed, c.batch_size);
    map.epoch = static_cast<int>(c.epochs);
    auto dir = fs::path(g.out) / "rank_saliency";
    auto csv = open_out(dir / "saliency.csv");
    write_saliency_csv(csv, map, data.all.basis.get());
    auto mcsv = open_out(dir / "marginals.csv");
    write_marginals_csv(mcsv, map);
    write_saliency_pngs(dir, map);
    const double ratio = column0_dominance(map);
    std::cout << "held-out accuracy " << (history.empty() ? 0.0 : history.back().accuracy) << ", majority baseline "
              << baseline << ", column-0 dominance " << ratio << "\n";
    data.manifest["majority_baseline"] = baseline;
    data.manifest["column0_dominance"] = ratio;
    finish(c, "rank", data.manifest);
  });

  // saliency
  auto* sal = app.add_subcommand("saliency", "saliency map of a 2-d binary checkpoint over held-out curves");
  std::string sal_ckpt;
  sal->add_option("--checkpoint", sal_ckpt)->required();
  sal->callback([&] {
    auto c = config();
    auto ck = load_model(sal_ckpt, 1);
    if (ck.spec.spatial_rank != 2) throw std::runtime_error("saliency needs a 2-d model");
    auto data = build_binary_data(c, 2);
    auto pos = indices_with_label(data.parts.test, 1);
    auto map = saliency(ck.model, data.parts.test, pos, SaliencyTarget::logit, 0, c.batch_size);
    auto dir = fs::path(g.out) / "saliency";
    auto csv = open_out(dir / "saliency.csv");
    write_saliency_csv(csv, map, data.all.basis.get());
    auto mcsv = open_out(dir / "marginals.csv");
    write_marginals_csv(mcsv, map);
    write_saliency_pngs(dir, map);
    // imaginary-channel saliency at real-character columns against the global mean
    auto m = marginals(map.blue, map.rows, map.cols);
    double global = 0, real = 0;
    std::size_t nreal = 0;
    for (std::size_t j = 0; j < map.cols; ++j) {
      global += m.per_twist[j] / static_cast<double>(map.cols);
      if (data.all.basis->characters()[j].is_real()) real += m.per_twist[j], ++nreal;
    }
    std::cout << "S_B mean " << global << ", at real-character columns " << (nreal ? real / nreal : 0.0) << "\n";
    finish(c, "saliency", {{"samples", pos.size()}, {"s_b_global_mean", global}, {"s_b_real_columns_mean", nreal ? real / nreal : 0.0}});
  });

  // render
  auto* render = app.add_subcommand("render", "PNG from a CVTF sample or a metrics CSV");
  std::string render_cvtf, render_metrics, render_png = "render.png";
  std::size_t render_index = 0;
  render->add_option("--cvtf", render_cvtf);
  render->add_option("--index", render_index);
  render->add_option("--metrics", render_metrics);
  render->add_option("--png", render_png, "output file name inside --out")->capture_default_str();
  render->callback([&] {
    if (render_cvtf.empty() == render_metrics.empty()) throw CLI::ValidationError("render", "give exactly one of --cvtf, --metrics");
    auto img = render_cvtf.empty() ? metrics_chart(render_metrics) : render_sample(encode::read_dataset(render_cvtf), render_index);
    fs::create_directories(g.out);
    encode::write_png(fs::path(g.out) / render_png, img);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
