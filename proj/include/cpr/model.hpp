#pragma once

#include <vector>

#include "cpr/autodiff.hpp"
#include "cpr/rng.hpp"
#include "cpr/tensor.hpp"

namespace cpr {

// Dual classifier: one prototype and one reciprocal point per known class,
// plus a single learnable margin R shared by all classes. Distances are
// negative dot products, d(f, v) = -<f, v>.
class DualClassifier {
 public:
  DualClassifier(int num_classes, int feature_dim, Rng& rng, double init_std = 0.1,
                 double margin_init = 1.0);

  int num_classes() const { return num_classes_; }
  int feature_dim() const { return feature_dim_; }

  Param& prototypes() { return prototypes_; }
  const Param& prototypes() const { return prototypes_; }
  Param& reciprocals() { return reciprocals_; }
  const Param& reciprocals() const { return reciprocals_; }
  Param& margin() { return margin_; }
  double margin_value() const { return margin_.value[0]; }

  // R >= 0, applied after every optimizer step.
  void clamp_margin();

  std::vector<Param*> parameters();

 private:
  int num_classes_;
  int feature_dim_;
  Param prototypes_;   // K x D
  Param reciprocals_;  // K x D
  Param margin_;       // scalar
};

// Per-sample probability bundle.
//   p_p = softmax(f . p_k)          nearest-prototype distribution
//   p_r = softmax(-f . r_k)         high where f is far from r_k
//   p_c = softmax([f.p_1..f.p_K, f.r_1..f.r_K])  collaborative, 2K-way
struct ProbTriple {
  Tensor logits_p;  // K
  Tensor logits_r;  // K
  Tensor p_p;       // K
  Tensor p_r;       // K
  Tensor p_c;       // 2K
};

double distance(const Tensor& f, const Tensor& point);

ProbTriple prob_triple(const DualClassifier& model, const Tensor& f);
std::vector<ProbTriple> prob_triples(const DualClassifier& model, const Tensor& features);
// Shared with the training path: triples assembled from precomputed logits.
std::vector<ProbTriple> triples_from_logits(const Tensor& logits_p, const Tensor& logits_r);

// label == num_classes encodes "unknown".
struct Prediction {
  int label;
  double confidence;  // max(p_c)
  double anomaly;
};

Prediction predict_from(const ProbTriple& t, int num_classes);
Prediction predict(const DualClassifier& model, const Tensor& f);

// -log(max over the reciprocal half of p_c); low for unknown-like samples.
double anomaly_score(const ProbTriple& t, int num_classes);

// ---- value-level losses ----

double loss_ce_proto(const ProbTriple& t, int y);
double loss_ce_recip(const ProbTriple& t, int y);
// max(d(f, r_k) - R, 0)
double loss_open(const ProbTriple& t, double margin, int k);
// max(d(f, p_k) - min_i d(f, r_i), 0)
double loss_split(const ProbTriple& t, int k);
// mean over batch of CE_p + CE_r + lambda * (L_o + L_split)
double loss_source(const DualClassifier& model, const Tensor& features,
                   const std::vector<int>& labels, double lambda, bool include_split = true);
// -sum p log p, 0 log 0 = 0
double entropy(const Tensor& p);
// KL(p_strong || p_weak); the weak side is a fixed target, clamped at 1e-12.
double loss_kl(const Tensor& p_strong, const Tensor& p_weak);
// w * mean_known H + (1-w) * mean_unknown H with w = n_unknown / (n_known + n_unknown).
// uniform_weights forces w = 1/2 (ablation). Empty sets contribute nothing.
double loss_entropy_weighted(const std::vector<Tensor>& known_pc,
                             const std::vector<Tensor>& unknown_pc,
                             bool uniform_weights = false);

// ---- tape-graph builders (training path; values agree with the above) ----

struct ClassifierVars {
  Tape::VarId logits_p;
  Tape::VarId logits_r;
  Tape::VarId logits_c;
};

ClassifierVars classifier_logits(Tape& tape, DualClassifier& model, Tape::VarId features);

Tape::VarId source_loss_graph(Tape& tape, DualClassifier& model, const ClassifierVars& vars,
                              const std::vector<int>& labels, double lambda, bool include_split);

// KL(p_c(strong) || stop_grad(p_c(weak))), mean over the batch.
Tape::VarId kl_consistency_graph(Tape& tape, Tape::VarId strong_logits_c, const Tensor& weak_pc);

// Sum over the given rows of the collaborative entropy H(row).
Tape::VarId entropy_sum_graph(Tape& tape, Tape::VarId logits_c, const std::vector<int>& rows);

// Sum over the given rows of max(d(f, r_label) - R, 0).
Tape::VarId open_loss_sum_graph(Tape& tape, Tape::VarId logits_r, Tape::VarId margin,
                                const std::vector<int>& rows, const std::vector<int>& labels);

}  // namespace cpr
