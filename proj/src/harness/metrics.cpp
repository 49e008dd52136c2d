#include "twistcnn/harness/metrics.hpp"

#include <numeric>
#include <ostream>

namespace twistcnn::harness {

std::uint64_t ConfusionMatrix::total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }

double ConfusionMatrix::accuracy() const {
  std::uint64_t diag = 0;
  for (std::size_t k = 0; k < classes; ++k) diag += at(k, k);
  const auto t = total();
  return t == 0 ? 0.0 : static_cast<double>(diag) / static_cast<double>(t);
}

BinaryScores binary_scores(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  auto ratio = [](double a, double b) { return b == 0.0 ? 0.0 : a / b; };
  BinaryScores s;
  s.precision = ratio(static_cast<double>(tp), static_cast<double>(tp + fp));
  s.recall = ratio(static_cast<double>(tp), static_cast<double>(tp + fn));
  s.f1 = ratio(2.0 * s.precision * s.recall, s.precision + s.recall);
  return s;
}

BinaryScores binary_scores(const ConfusionMatrix& cm) { return binary_scores(cm.at(1, 1), cm.at(0, 1), cm.at(1, 0)); }

BinaryScores macro_scores(const ConfusionMatrix& cm) {
  BinaryScores mean;
  for (std::size_t k = 0; k < cm.classes; ++k) {
    std::uint64_t tp = cm.at(k, k), fp = 0, fn = 0;
    for (std::size_t j = 0; j < cm.classes; ++j) {
      if (j == k) continue;
      fp += cm.at(j, k);
      fn += cm.at(k, j);
    }
    auto s = binary_scores(tp, fp, fn);
    mean.precision += s.precision / static_cast<double>(cm.classes);
    mean.recall += s.recall / static_cast<double>(cm.classes);
    mean.f1 += s.f1 / static_cast<double>(cm.classes);
  }
  return mean;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRecord>& records) {
  out << "epoch,split,loss,precision,recall,f1\n";
  out.precision(17);
  for (const auto& r : records)
    out << r.epoch << ',' << r.split << ',' << r.loss << ',' << r.precision << ',' << r.recall << ',' << r.f1 << '\n';
}

void write_accuracy_csv(std::ostream& out, const std::vector<MetricsRecord>& records) {
  out << "epoch,split,accuracy\n";
  out.precision(17);
  for (const auto& r : records) out << r.epoch << ',' << r.split << ',' << r.accuracy << '\n';
}

void write_confusion_csv(std::ostream& out, const std::vector<MetricsRecord>& records) {
  out << "epoch,split,truth,predicted,count\n";
  for (const auto& r : records)
    for (std::size_t t = 0; t < r.confusion.classes; ++t)
      for (std::size_t p = 0; p < r.confusion.classes; ++p)
        out << r.epoch << ',' << r.split << ',' << t << ',' << p << ',' << r.confusion.at(t, p) << '\n';
}

}  // namespace twistcnn::harness
