#pragma once

#include <string>
#include <vector>

#include "cpr/config.hpp"
#include "cpr/data.hpp"
#include "cpr/eval.hpp"
#include "cpr/trainer.hpp"

namespace cpr {

DomainPair generate_pair(const RunConfig& cfg);

// Full CPR training with a seed override; returns the run together with the
// trainer's final model for further probing.
struct TrainedRun {
  RunResult result;
  double final_h() const { return result.final_eval.h_score; }
};

TrainedRun train_once(const RunConfig& cfg, const DomainPair& pair, std::uint64_t seed);

// Source-only classifier (prototype cross-entropy only) with a fixed entropy
// threshold: unknown iff H(softmax(f.P^T)) >= frac * log(K).
EvalReport source_only_baseline(const RunConfig& cfg, const DomainPair& pair, std::uint64_t seed);

struct AblationRow {
  std::string name;
  std::vector<double> h_scores;  // one per seed
  double median_h = 0.0;
};

// Variants: full, no_split, no_warmup, no_consistency, no_threshold; seeds
// 1..num_seeds applied on the same data pair.
std::vector<AblationRow> run_ablation_table(const RunConfig& cfg, const DomainPair& pair,
                                            int num_seeds);
std::string ablation_table_csv(const std::vector<AblationRow>& rows);

struct SweepRow {
  int n_tgt_private = 0;
  std::vector<double> h_scores;
  double mean_h = 0.0;
  double std_h = 0.0;
  double median_h = 0.0;
};

// Regenerates data per point with n_common / n_src_private fixed; each seed
// regenerates and retrains.
std::vector<SweepRow> run_unknown_class_sweep(const RunConfig& cfg);
std::string sweep_table_csv(const std::vector<SweepRow>& rows);

double median(std::vector<double> values);

}  // namespace cpr
