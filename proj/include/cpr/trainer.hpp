#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cpr/data.hpp"
#include "cpr/eval.hpp"
#include "cpr/extractor.hpp"
#include "cpr/model.hpp"
#include "cpr/optim.hpp"
#include "cpr/selection.hpp"

namespace cpr {

struct AblationFlags {
  bool disable_split = false;
  bool disable_warmup = false;
  bool disable_consistency_criterion = false;
  bool disable_threshold_criterion = false;
  bool disable_entropy_weighting = false;
};

struct TrainConfig {
  double lambda = 0.1;
  double alpha = 0.99;
  int warmup_iters = 200;
  int total_iters = 1500;
  int batch_size = 36;
  int eval_interval = 100;
  std::uint64_t seed = 1;
  SgdConfig optim;
  // decay for the prototype/reciprocal matrices; < 0 falls back to
  // optim.weight_decay. Shrinking the classifier rows caps collaborative
  // confidence without moving any argmax decision. The margin never decays.
  double classifier_weight_decay = -1.0;
  // learning-rate multiplier for the classifier points and margin; slows the
  // logit-scale ramp so the confidence thresholds can track it
  double classifier_lr_scale = 1.0;
  AugmentScales augment;
  std::vector<int> hidden_dims = {128, 128};
  int feature_dim = 64;
  double classifier_init_std = 0.1;
  double margin_init = 1.0;
  AblationFlags ablation;

  void validate() const;
};

// Per-iteration record. l_all == l_src + l_trg exactly (same tape addition),
// and l_trg == l_kl + l_ent + lambda * l_o_tgt.
struct StepStats {
  int iter = 0;
  bool warmup = true;
  double l_src = 0.0;
  double l_kl = 0.0;
  double l_ent = 0.0;
  double l_o_tgt = 0.0;
  double l_trg = 0.0;
  double l_all = 0.0;
  double rho_c = 0.0;
  double rho_o = 0.0;
  int n_sel_known = 0;
  int n_sel_unknown = 0;
};

struct RunResult {
  std::vector<StepStats> steps;
  std::vector<std::pair<int, EvalReport>> evals;  // (iter, report)
  EvalReport final_eval;
};

// One metrics line per iteration as JSON; eval fields appear on eval rows.
std::string metrics_line(const StepStats& s, const EvalReport* eval);

class Trainer {
 public:
  Trainer(TrainConfig cfg, const DomainPair& pair);

  StepStats step(const SourceBatch& src, const TargetBatch& tgt);
  StepStats step_warmup(const SourceBatch& src, const TargetBatch& tgt);
  StepStats step_adapt(const SourceBatch& src, const TargetBatch& tgt);

  // Drives the sampler for the remaining iterations, evaluating on
  // target_eval every eval_interval steps. sink, when set, receives one
  // metrics line per iteration.
  RunResult run(const std::function<void(const std::string&)>& sink = nullptr);

  const TrainConfig& config() const { return cfg_; }
  int iter() const { return iter_; }
  int effective_warmup() const { return cfg_.ablation.disable_warmup ? 0 : cfg_.warmup_iters; }
  FeatureExtractor& extractor() { return extractor_; }
  const FeatureExtractor& extractor() const { return extractor_; }
  DualClassifier& model() { return model_; }
  const DualClassifier& model() const { return model_; }
  ThresholdState& thresholds() { return thresholds_; }
  SgdOptimizer& optimizer() { return optimizer_; }
  Rng& loop_rng() { return loop_rng_; }
  void set_iter(int iter) { iter_ = iter; }

  std::vector<Param*> parameters();

 private:
  struct InitBundle {
    FeatureExtractor extractor;
    DualClassifier model;
  };

  struct TargetForward {
    Tape::VarId l_kl;
    ClassifierVars weak;
    ClassifierVars strong;
    std::vector<ProbTriple> weak_triples;
    std::vector<ProbTriple> strong_triples;
  };

  Trainer(TrainConfig cfg, const DomainPair& pair, InitBundle init);
  static InitBundle init_params(const TrainConfig& cfg, const DomainPair& pair);

  TargetForward forward_target(Tape& tape, const TargetBatch& tgt);
  StepStats finish_step(Tape& tape, Tape::VarId l_src, Tape::VarId l_trg, StepStats stats,
                        const std::vector<ProbTriple>& weak_triples);

  TrainConfig cfg_;
  const DomainPair& pair_;
  FeatureExtractor extractor_;
  DualClassifier model_;
  ThresholdState thresholds_;
  SgdOptimizer optimizer_;
  Rng loop_rng_;
  AugmentParams augment_;
  int iter_ = 0;
};

}  // namespace cpr
