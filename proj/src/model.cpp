#include "cpr/model.hpp"

#include <cmath>

#include "cpr/kernels.hpp"

namespace cpr {

DualClassifier::DualClassifier(int num_classes, int feature_dim, Rng& rng, double init_std,
                               double margin_init)
    : num_classes_(num_classes),
      feature_dim_(feature_dim),
      prototypes_(Tensor({num_classes, feature_dim})),
      reciprocals_(Tensor({num_classes, feature_dim})),
      margin_(Tensor::scalar(margin_init)) {
  if (num_classes < 1 || feature_dim < 1) {
    throw ConfigError("DualClassifier requires positive num_classes and feature_dim");
  }
  if (margin_init < 0.0) throw ConfigError("margin_init must be non-negative");
  for (std::size_t i = 0; i < prototypes_.value.size(); ++i) {
    prototypes_.value[i] = rng.normal(0.0, init_std);
  }
  for (std::size_t i = 0; i < reciprocals_.value.size(); ++i) {
    reciprocals_.value[i] = rng.normal(0.0, init_std);
  }
}

void DualClassifier::clamp_margin() {
  if (margin_.value[0] < 0.0) margin_.value[0] = 0.0;
}

std::vector<Param*> DualClassifier::parameters() {
  return {&prototypes_, &reciprocals_, &margin_};
}

double distance(const Tensor& f, const Tensor& point) {
  if (f.size() != point.size()) throw ConfigError("distance: dimension mismatch");
  double dot = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) dot += f[i] * point[i];
  return -dot;
}

std::vector<ProbTriple> triples_from_logits(const Tensor& logits_p, const Tensor& logits_r) {
  if (logits_p.rows() != logits_r.rows() || logits_p.cols() != logits_r.cols()) {
    throw ConfigError("triples_from_logits: logit shape mismatch");
  }
  const int n = logits_p.rows();
  const int k = logits_p.cols();
  std::vector<ProbTriple> out(n);
  for (int r = 0; r < n; ++r) {
    ProbTriple& t = out[r];
    t.logits_p = Tensor({k});
    t.logits_r = Tensor({k});
    Tensor neg_r({k});
    Tensor concat({2 * k});
    for (int j = 0; j < k; ++j) {
      t.logits_p[j] = logits_p.at(r, j);
      t.logits_r[j] = logits_r.at(r, j);
      neg_r[j] = -t.logits_r[j];
      concat[j] = t.logits_p[j];
      concat[k + j] = t.logits_r[j];
    }
    t.p_p = softmax(t.logits_p);
    t.p_r = softmax(neg_r);
    t.p_c = softmax(concat);
  }
  return out;
}

std::vector<ProbTriple> prob_triples(const DualClassifier& model, const Tensor& features) {
  if (features.cols() != model.feature_dim()) {
    throw ConfigError("prob_triples: feature dim mismatch");
  }
  const int n = features.rows();
  const int k = model.num_classes();
  Tensor lp({n, k});
  Tensor lr({n, k});
  kernels::matmul_nt(features.data(), model.prototypes().value.data(), lp.data(), n,
                     model.feature_dim(), k);
  kernels::matmul_nt(features.data(), model.reciprocals().value.data(), lr.data(), n,
                     model.feature_dim(), k);
  return triples_from_logits(lp, lr);
}

ProbTriple prob_triple(const DualClassifier& model, const Tensor& f) {
  Tensor row = f.ndim() == 1 ? Tensor({1, f.cols()}, {f.data(), f.data() + f.size()}) : f;
  return prob_triples(model, row).front();
}

Prediction predict_from(const ProbTriple& t, int num_classes) {
  const int j = argmax(t.p_c);
  Prediction p;
  p.label = j < num_classes ? j : num_classes;
  p.confidence = t.p_c[j];
  p.anomaly = anomaly_score(t, num_classes);
  return p;
}

Prediction predict(const DualClassifier& model, const Tensor& f) {
  return predict_from(prob_triple(model, f), model.num_classes());
}

double anomaly_score(const ProbTriple& t, int num_classes) {
  double mx = t.p_c[num_classes];
  for (int j = num_classes + 1; j < 2 * num_classes; ++j) mx = std::max(mx, t.p_c[j]);
  return -std::log(mx);
}

namespace {

double log_sum_exp(const Tensor& v) {
  double mx = v[0];
  for (std::size_t i = 1; i < v.size(); ++i) mx = std::max(mx, v[i]);
  double z = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) z += std::exp(v[i] - mx);
  return mx + std::log(z);
}

void check_label(int y, int k) {
  if (y < 0 || y >= k) throw ConfigError("class index out of range");
}

}  // namespace

double loss_ce_proto(const ProbTriple& t, int y) {
  check_label(y, static_cast<int>(t.logits_p.size()));
  return log_sum_exp(t.logits_p) - t.logits_p[y];
}

double loss_ce_recip(const ProbTriple& t, int y) {
  check_label(y, static_cast<int>(t.logits_r.size()));
  Tensor neg({static_cast<int>(t.logits_r.size())});
  for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -t.logits_r[i];
  return log_sum_exp(neg) - neg[y];
}

double loss_open(const ProbTriple& t, double margin, int k) {
  check_label(k, static_cast<int>(t.logits_r.size()));
  return std::max(-t.logits_r[k] - margin, 0.0);
}

double loss_split(const ProbTriple& t, int k) {
  check_label(k, static_cast<int>(t.logits_p.size()));
  double min_rec = -t.logits_r[0];
  for (std::size_t i = 1; i < t.logits_r.size(); ++i) {
    min_rec = std::min(min_rec, -t.logits_r[i]);
  }
  return std::max(-t.logits_p[k] - min_rec, 0.0);
}

double loss_source(const DualClassifier& model, const Tensor& features,
                   const std::vector<int>& labels, double lambda, bool include_split) {
  if (lambda < 0.0) throw ConfigError("lambda must be non-negative");
  if (static_cast<int>(labels.size()) != features.rows()) {
    throw ConfigError("loss_source: label count does not match batch");
  }
  const std::vector<ProbTriple> triples = prob_triples(model, features);
  const double margin = model.margin_value();
  double total = 0.0;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const int y = labels[i];
    double per = loss_ce_proto(triples[i], y) + loss_ce_recip(triples[i], y);
    double reg = loss_open(triples[i], margin, y);
    if (include_split) reg += loss_split(triples[i], y);
    total += per + lambda * reg;
  }
  return total / static_cast<double>(triples.size());
}

double entropy(const Tensor& p) {
  double h = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  }
  return h;
}

double loss_kl(const Tensor& p_strong, const Tensor& p_weak) {
  if (p_strong.size() != p_weak.size()) throw ConfigError("loss_kl: dimension mismatch");
  double kl = 0.0;
  for (std::size_t i = 0; i < p_strong.size(); ++i) {
    if (p_strong[i] > 0.0) {
      kl += p_strong[i] * (std::log(p_strong[i]) - std::log(std::max(p_weak[i], 1e-12)));
    }
  }
  return kl;
}

double loss_entropy_weighted(const std::vector<Tensor>& known_pc,
                             const std::vector<Tensor>& unknown_pc, bool uniform_weights) {
  const double nk = static_cast<double>(known_pc.size());
  const double nu = static_cast<double>(unknown_pc.size());
  if (nk + nu == 0.0) return 0.0;
  const double w = uniform_weights ? 0.5 : nu / (nk + nu);
  double loss = 0.0;
  if (!known_pc.empty()) {
    double mean = 0.0;
    for (const Tensor& p : known_pc) mean += entropy(p);
    loss += w * mean / nk;
  }
  if (!unknown_pc.empty()) {
    double mean = 0.0;
    for (const Tensor& p : unknown_pc) mean += entropy(p);
    loss += (1.0 - w) * mean / nu;
  }
  return loss;
}

ClassifierVars classifier_logits(Tape& tape, DualClassifier& model, Tape::VarId features) {
  ClassifierVars v;
  const Tape::VarId protos = tape.param(model.prototypes());
  const Tape::VarId recips = tape.param(model.reciprocals());
  v.logits_p = tape.matmul_nt(features, protos);
  v.logits_r = tape.matmul_nt(features, recips);
  v.logits_c = tape.concat_cols(v.logits_p, v.logits_r);
  return v;
}

Tape::VarId source_loss_graph(Tape& tape, DualClassifier& model, const ClassifierVars& vars,
                              const std::vector<int>& labels, double lambda, bool include_split) {
  if (lambda < 0.0) throw ConfigError("lambda must be non-negative");
  // CE_p = -log softmax(logits_p)[y]
  const auto ce_p = tape.scale(tape.pick_per_row(tape.log_softmax_rows(vars.logits_p), labels), -1.0);
  // CE_r = -log softmax(-logits_r)[y]
  const auto neg_r = tape.scale(vars.logits_r, -1.0);
  const auto ce_r = tape.scale(tape.pick_per_row(tape.log_softmax_rows(neg_r), labels), -1.0);
  // L_o = max(d(f, r_y) - R, 0) with d(f, r_y) = -logits_r[y]
  const auto margin = tape.param(model.margin());
  const auto d_r_y = tape.pick_per_row(neg_r, labels);
  const auto open = tape.relu(tape.sub_scalar(d_r_y, margin));
  auto reg = open;
  if (include_split) {
    // L_split = max(d(f, p_y) - min_i d(f, r_i), 0)
    const auto d_p_y = tape.pick_per_row(tape.scale(vars.logits_p, -1.0), labels);
    const auto split = tape.relu(tape.sub(d_p_y, tape.row_min(neg_r)));
    reg = tape.add(open, split);
  }
  const auto per_sample = tape.add(tape.add(ce_p, ce_r), tape.scale(reg, lambda));
  return tape.mean_all(per_sample);
}

Tape::VarId kl_consistency_graph(Tape& tape, Tape::VarId strong_logits_c, const Tensor& weak_pc) {
  const Tensor& sv = tape.value(strong_logits_c);
  if (!sv.same_shape(weak_pc)) throw ConfigError("kl_consistency: shape mismatch");
  Tensor log_pw(weak_pc.shape());
  for (std::size_t i = 0; i < weak_pc.size(); ++i) {
    log_pw[i] = std::log(std::max(weak_pc[i], 1e-12));
  }
  const auto ls = tape.log_softmax_rows(strong_logits_c);
  const auto diff = tape.add_const(ls, [&] {
    Tensor neg(log_pw.shape());
    for (std::size_t i = 0; i < log_pw.size(); ++i) neg[i] = -log_pw[i];
    return neg;
  }());
  const auto per_row = tape.row_sum(tape.mul(tape.exp(ls), diff));
  return tape.mean_all(per_row);
}

Tape::VarId entropy_sum_graph(Tape& tape, Tape::VarId logits_c, const std::vector<int>& rows) {
  const auto ls = tape.gather_rows(tape.log_softmax_rows(logits_c), rows);
  const auto neg_h = tape.row_sum(tape.mul(tape.exp(ls), ls));
  return tape.scale(tape.sum_all(neg_h), -1.0);
}

Tape::VarId open_loss_sum_graph(Tape& tape, Tape::VarId logits_r, Tape::VarId margin,
                                const std::vector<int>& rows, const std::vector<int>& labels) {
  if (rows.size() != labels.size()) {
    throw ConfigError("open_loss_sum_graph: rows and labels differ in length");
  }
  const auto gathered = tape.gather_rows(logits_r, rows);
  const auto d = tape.pick_per_row(tape.scale(gathered, -1.0), labels);
  return tape.sum_all(tape.relu(tape.sub_scalar(d, margin)));
}

}  // namespace cpr
