#include "cpr/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "cpr/error.hpp"
#include "cpr/kernels.hpp"

namespace cpr {

DomainPair generate_pair(const RunConfig& cfg) {
  return gen_synthetic_pair(cfg.split, cfg.dim, cfg.samples_per_class, cfg.shift, cfg.data_seed);
}

TrainedRun train_once(const RunConfig& cfg, const DomainPair& pair, std::uint64_t seed) {
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  Trainer trainer(tc, pair);
  TrainedRun run;
  run.result = trainer.run();
  return run;
}

EvalReport source_only_baseline(const RunConfig& cfg, const DomainPair& pair,
                                std::uint64_t seed) {
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  tc.validate();
  Rng init_rng(seed);
  FeatureExtractor extractor =
      FeatureExtractor::mlp(pair.source.dim(), tc.hidden_dims, tc.feature_dim, init_rng);
  Param prototypes(Tensor({pair.num_source_classes, tc.feature_dim}));
  for (std::size_t i = 0; i < prototypes.value.size(); ++i) {
    prototypes.value[i] = init_rng.normal(0.0, tc.classifier_init_std);
  }
  std::vector<Param*> params = extractor.parameters();
  params.push_back(&prototypes);
  const double cls_wd =
      tc.classifier_weight_decay < 0.0 ? tc.optim.weight_decay : tc.classifier_weight_decay;
  std::vector<double> decay(extractor.parameters().size(), tc.optim.weight_decay);
  decay.push_back(cls_wd);
  std::vector<double> scale(extractor.parameters().size(), 1.0);
  scale.push_back(tc.classifier_lr_scale);
  SgdOptimizer opt(tc.optim, params, decay, scale);

  Rng loop_rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<int> order;
  std::size_t pos = 0;
  const int n = pair.source.size();
  for (int it = 0; it < tc.total_iters; ++it) {
    Tensor x({tc.batch_size, pair.source.dim()});
    std::vector<int> y(tc.batch_size);
    for (int i = 0; i < tc.batch_size; ++i) {
      if (pos >= order.size()) {
        order.resize(n);
        for (int j = 0; j < n; ++j) order[j] = j;
        loop_rng.shuffle(order);
        pos = 0;
      }
      const int idx = order[pos++];
      const double* row = pair.source.sample(idx);
      std::copy(row, row + pair.source.dim(), x.row_ptr(i));
      y[i] = pair.source.labels[idx];
    }
    Tape tape;
    const auto f = extractor.forward(tape, tape.input(x));
    const auto logits = tape.matmul_nt(f, tape.param(prototypes));
    const auto ce = tape.scale(tape.pick_per_row(tape.log_softmax_rows(logits), y), -1.0);
    const auto loss = tape.mean_all(ce);
    if (!std::isfinite(tape.scalar(loss))) throw StateError("baseline loss diverged");
    tape.backward(loss);
    opt.step();
  }

  const double tau =
      cfg.baseline_entropy_threshold_frac * std::log(static_cast<double>(pair.num_source_classes));
  const Tensor features = extractor.forward(pair.target_eval.features);
  Tensor logits({features.rows(), pair.num_source_classes});
  kernels::matmul_nt(features.data(), prototypes.value.data(), logits.data(), features.rows(),
                     features.cols(), pair.num_source_classes);
  const Tensor probs = softmax(logits);
  std::vector<int> predicted(features.rows());
  for (int i = 0; i < features.rows(); ++i) {
    Tensor row({pair.num_source_classes},
               std::vector<double>(probs.row_ptr(i), probs.row_ptr(i) + pair.num_source_classes));
    predicted[i] = entropy(row) >= tau ? pair.num_source_classes : argmax(row);
  }
  return score_predictions(pair.target_eval.labels, predicted, {}, pair.num_source_classes);
}

double median(std::vector<double> values) {
  if (values.empty()) throw ConfigError("median of empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<AblationRow> run_ablation_table(const RunConfig& cfg, const DomainPair& pair,
                                            int num_seeds) {
  if (num_seeds < 1) throw ConfigError("ablation table needs at least one seed");
  struct Variant {
    const char* name;
    void (*apply)(AblationFlags&);
  };
  const Variant variants[] = {
      {"full", [](AblationFlags&) {}},
      {"no_split", [](AblationFlags& f) { f.disable_split = true; }},
      {"no_warmup", [](AblationFlags& f) { f.disable_warmup = true; }},
      {"no_consistency", [](AblationFlags& f) { f.disable_consistency_criterion = true; }},
      {"no_threshold", [](AblationFlags& f) { f.disable_threshold_criterion = true; }},
  };
  std::vector<AblationRow> rows;
  for (const Variant& v : variants) {
    AblationRow row;
    row.name = v.name;
    for (int s = 1; s <= num_seeds; ++s) {
      RunConfig variant_cfg = cfg;
      v.apply(variant_cfg.train.ablation);
      row.h_scores.push_back(
          train_once(variant_cfg, pair, static_cast<std::uint64_t>(s)).final_h());
    }
    row.median_h = median(row.h_scores);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string ablation_table_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream os;
  os << "variant,median_h";
  if (!rows.empty()) {
    for (std::size_t s = 0; s < rows.front().h_scores.size(); ++s) os << ",h_seed" << s + 1;
  }
  os << "\n";
  char buf[32];
  for (const AblationRow& row : rows) {
    std::snprintf(buf, sizeof(buf), "%.6f", row.median_h);
    os << row.name << "," << buf;
    for (double h : row.h_scores) {
      std::snprintf(buf, sizeof(buf), "%.6f", h);
      os << "," << buf;
    }
    os << "\n";
  }
  return os.str();
}

std::vector<SweepRow> run_unknown_class_sweep(const RunConfig& cfg) {
  std::vector<SweepRow> rows;
  for (int n_tgt : cfg.sweep_n_tgt_private) {
    SweepRow row;
    row.n_tgt_private = n_tgt;
    for (std::uint64_t seed : cfg.sweep_seeds) {
      RunConfig point_cfg = cfg;
      point_cfg.split.n_tgt_private = n_tgt;
      point_cfg.data_seed = seed;
      const DomainPair pair = generate_pair(point_cfg);
      row.h_scores.push_back(train_once(point_cfg, pair, seed).final_h());
    }
    double mean = 0.0;
    for (double h : row.h_scores) mean += h;
    mean /= static_cast<double>(row.h_scores.size());
    double var = 0.0;
    for (double h : row.h_scores) var += (h - mean) * (h - mean);
    row.mean_h = mean;
    row.std_h = std::sqrt(var / static_cast<double>(row.h_scores.size()));
    row.median_h = median(row.h_scores);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string sweep_table_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "n_tgt_private,mean_h,std_h,median_h";
  if (!rows.empty()) {
    for (std::size_t s = 0; s < rows.front().h_scores.size(); ++s) os << ",h_seed" << s + 1;
  }
  os << "\n";
  char buf[32];
  for (const SweepRow& row : rows) {
    os << row.n_tgt_private;
    for (double v : {row.mean_h, row.std_h, row.median_h}) {
      std::snprintf(buf, sizeof(buf), "%.6f", v);
      os << "," << buf;
    }
    for (double h : row.h_scores) {
      std::snprintf(buf, sizeof(buf), "%.6f", h);
      os << "," << buf;
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace cpr
