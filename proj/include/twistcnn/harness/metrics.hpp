#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace twistcnn::harness {

/// counts[truth * classes + predicted]
struct ConfusionMatrix {
  std::size_t classes = 2;
  std::vector<std::uint64_t> counts;

  explicit ConfusionMatrix(std::size_t k = 2) : classes(k), counts(k * k, 0) {}
  void add(std::size_t truth, std::size_t predicted) { ++counts.at(truth * classes + predicted); }
  std::uint64_t at(std::size_t truth, std::size_t predicted) const { return counts[truth * classes + predicted]; }
  std::uint64_t total() const;
  double accuracy() const;
};

struct BinaryScores {
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

/// Scores for the positive class; each ratio with a zero denominator is 0.
BinaryScores binary_scores(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn);
/// Class 1 is the positive class.
BinaryScores binary_scores(const ConfusionMatrix& cm);
/// Unweighted mean over classes of one-vs-rest scores (rank task).
BinaryScores macro_scores(const ConfusionMatrix& cm);

struct MetricsRecord {
  int epoch = 0;
  std::string split;
  double loss = 0.0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  double accuracy = 0.0;
  ConfusionMatrix confusion;
};

/// Columns: epoch,split,loss,precision,recall,f1
void write_metrics_csv(std::ostream& out, const std::vector<MetricsRecord>& records);
/// Columns: epoch,split,accuracy
void write_accuracy_csv(std::ostream& out, const std::vector<MetricsRecord>& records);
/// Columns: epoch,split,truth,predicted,count
void write_confusion_csv(std::ostream& out, const std::vector<MetricsRecord>& records);

}  // namespace twistcnn::harness
