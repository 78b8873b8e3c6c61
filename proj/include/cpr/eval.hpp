#pragma once

#include <string>
#include <vector>

#include "cpr/data.hpp"
#include "cpr/extractor.hpp"
#include "cpr/model.hpp"

namespace cpr {

struct EvalReport {
  // per-class mean accuracy over common classes
  double acc_common = 0.0;
  // pooled accuracy over target-private samples (predicted unknown = correct)
  double acc_unknown = 0.0;
  double h_score = 0.0;
  int n_eval = 0;
  // (K+1) x (K+1); true target-private samples collapse to row K
  std::vector<std::vector<int>> confusion;
  // per-sample anomaly scores grouped by ground truth
  std::vector<double> anomaly_known;
  std::vector<double> anomaly_unknown;

  std::string to_json() const;
};

// 2 a b / (a + b), defined as 0 when both accuracies are 0.
double h_score(double acc_c, double acc_t);

// Builds a report from per-sample outcomes; classes with no eval samples are
// excluded from the common-class mean.
EvalReport score_predictions(const std::vector<int>& true_labels,
                             const std::vector<int>& predicted,
                             const std::vector<double>& anomaly, int num_source_classes);

EvalReport evaluate(const FeatureExtractor& extractor, const DualClassifier& model,
                    const Dataset& target_eval, int num_source_classes);

struct HistogramTable {
  std::vector<double> edges;  // bins + 1 entries
  std::vector<int> known_counts;
  std::vector<int> unknown_counts;
};

HistogramTable anomaly_histogram(const EvalReport& report, int bins);
void write_histogram_csv(const HistogramTable& table, const std::string& path);

// CSV of (id, true label, predicted label, feature columns).
void export_features(const FeatureExtractor& extractor, const DualClassifier& model,
                     const Dataset& dataset, const std::string& path);

}  // namespace cpr
