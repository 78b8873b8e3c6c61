#include "cpr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

#include "cpr/error.hpp"

namespace cpr {

double h_score(double acc_c, double acc_t) {
  if (acc_c < 0.0 || acc_c > 1.0 || acc_t < 0.0 || acc_t > 1.0) {
    throw ConfigError("h_score: accuracies must lie in [0,1]");
  }
  if (acc_c == 0.0 && acc_t == 0.0) return 0.0;
  return 2.0 * acc_c * acc_t / (acc_c + acc_t);
}

EvalReport score_predictions(const std::vector<int>& true_labels,
                             const std::vector<int>& predicted,
                             const std::vector<double>& anomaly, int num_source_classes) {
  if (true_labels.size() != predicted.size()) {
    throw ConfigError("score_predictions: label/prediction count mismatch");
  }
  const int k = num_source_classes;
  EvalReport report;
  report.n_eval = static_cast<int>(true_labels.size());
  report.confusion.assign(k + 1, std::vector<int>(k + 1, 0));

  std::vector<int> class_total(k, 0), class_correct(k, 0);
  int unknown_total = 0, unknown_correct = 0;
  for (std::size_t i = 0; i < true_labels.size(); ++i) {
    const int t = true_labels[i];
    const int p = predicted[i];
    if (t < 0 || p < 0 || p > k) throw ConfigError("score_predictions: label out of range");
    const int row = t >= k ? k : t;
    report.confusion[row][p] += 1;
    if (t >= k) {
      ++unknown_total;
      if (p == k) ++unknown_correct;
      if (!anomaly.empty()) report.anomaly_unknown.push_back(anomaly[i]);
    } else {
      ++class_total[t];
      if (p == t) ++class_correct[t];
      if (!anomaly.empty()) report.anomaly_known.push_back(anomaly[i]);
    }
  }

  double acc_sum = 0.0;
  int classes_seen = 0;
  for (int c = 0; c < k; ++c) {
    if (class_total[c] == 0) continue;
    acc_sum += static_cast<double>(class_correct[c]) / class_total[c];
    ++classes_seen;
  }
  report.acc_common = classes_seen > 0 ? acc_sum / classes_seen : 0.0;
  report.acc_unknown =
      unknown_total > 0 ? static_cast<double>(unknown_correct) / unknown_total : 0.0;
  report.h_score = h_score(report.acc_common, report.acc_unknown);
  return report;
}

EvalReport evaluate(const FeatureExtractor& extractor, const DualClassifier& model,
                    const Dataset& target_eval, int num_source_classes) {
  const Tensor features = extractor.forward(target_eval.features);
  const std::vector<ProbTriple> triples = prob_triples(model, features);
  std::vector<int> predicted(triples.size());
  std::vector<double> anomaly(triples.size());
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const Prediction p = predict_from(triples[i], model.num_classes());
    predicted[i] = p.label;
    anomaly[i] = p.anomaly;
  }
  return score_predictions(target_eval.labels, predicted, anomaly, num_source_classes);
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["acc_common"] = acc_common;
  j["acc_unknown"] = acc_unknown;
  j["h_score"] = h_score;
  j["n_eval"] = n_eval;
  j["confusion"] = confusion;
  j["anomaly_known"] = anomaly_known;
  j["anomaly_unknown"] = anomaly_unknown;
  return j.dump(2);
}

HistogramTable anomaly_histogram(const EvalReport& report, int bins) {
  if (bins < 1) throw ConfigError("anomaly_histogram: bins must be positive");
  HistogramTable table;
  double lo = 0.0, hi = 1.0;
  bool any = false;
  for (const auto* group : {&report.anomaly_known, &report.anomaly_unknown}) {
    for (double v : *group) {
      if (!any) {
        lo = hi = v;
        any = true;
      } else {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  if (!any) throw ConfigError("anomaly_histogram: report has no anomaly scores");
  if (hi <= lo) hi = lo + 1.0;
  table.edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b) {
    table.edges[b] = lo + (hi - lo) * static_cast<double>(b) / bins;
  }
  table.known_counts.assign(bins, 0);
  table.unknown_counts.assign(bins, 0);
  const auto bucket = [&](double v) {
    int b = static_cast<int>((v - lo) / (hi - lo) * bins);
    return std::clamp(b, 0, bins - 1);
  };
  for (double v : report.anomaly_known) table.known_counts[bucket(v)] += 1;
  for (double v : report.anomaly_unknown) table.unknown_counts[bucket(v)] += 1;
  return table;
}

void write_histogram_csv(const HistogramTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open file for writing");
  out << "bin_lo,bin_hi,count_known,count_unknown\n";
  char buf[32];
  for (std::size_t b = 0; b + 1 < table.edges.size(); ++b) {
    std::snprintf(buf, sizeof(buf), "%.17g", table.edges[b]);
    out << buf << ",";
    std::snprintf(buf, sizeof(buf), "%.17g", table.edges[b + 1]);
    out << buf << "," << table.known_counts[b] << "," << table.unknown_counts[b] << "\n";
  }
}

void export_features(const FeatureExtractor& extractor, const DualClassifier& model,
                     const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open file for writing");
  const Tensor features = extractor.forward(dataset.features);
  out << "id,label,predicted";
  for (int j = 0; j < features.cols(); ++j) out << ",f" << j;
  out << "\n";
  char buf[32];
  const std::vector<ProbTriple> triples = prob_triples(model, features);
  for (int i = 0; i < features.rows(); ++i) {
    const Prediction p = predict_from(triples[i], model.num_classes());
    out << i << "," << dataset.labels[i] << "," << p.label;
    for (int j = 0; j < features.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", features.at(i, j));
      out << "," << buf;
    }
    out << "\n";
  }
}

}  // namespace cpr
