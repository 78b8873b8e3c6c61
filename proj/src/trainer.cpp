#include "cpr/trainer.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"

#include "cpr/error.hpp"
#include "cpr/kernels.hpp"

namespace cpr {

namespace {

constexpr std::uint64_t kLoopSeedSalt = 0x9e3779b97f4a7c15ull;

FeatureExtractor build_extractor(const TrainConfig& cfg, int input_dim, Rng& rng) {
  return FeatureExtractor::mlp(input_dim, cfg.hidden_dims, cfg.feature_dim, rng);
}

}  // namespace

void TrainConfig::validate() const {
  if (lambda < 0.0) throw ConfigError("lambda must be non-negative");
  if (alpha <= 0.0 || alpha >= 1.0) throw ConfigError("alpha must be in (0,1)");
  if (warmup_iters < 0) throw ConfigError("warmup_iters must be non-negative");
  if (total_iters < 1) throw ConfigError("total_iters must be positive");
  if (warmup_iters > total_iters) throw ConfigError("warmup_iters must not exceed total_iters");
  if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
  if (eval_interval < 1) throw ConfigError("eval_interval must be positive");
  if (feature_dim < 1) throw ConfigError("feature_dim must be positive");
  for (int h : hidden_dims) {
    if (h < 1) throw ConfigError("hidden_dims entries must be positive");
  }
  if (classifier_init_std <= 0.0) throw ConfigError("classifier_init_std must be positive");
  if (classifier_lr_scale <= 0.0) throw ConfigError("classifier_lr_scale must be positive");
  if (margin_init < 0.0) throw ConfigError("margin_init must be non-negative");
}

Trainer::InitBundle Trainer::init_params(const TrainConfig& cfg, const DomainPair& pair) {
  cfg.validate();
  if (pair.num_source_classes < 1) throw ConfigError("domain pair has no source classes");
  Rng init_rng(cfg.seed);
  FeatureExtractor extractor = build_extractor(cfg, pair.source.dim(), init_rng);
  DualClassifier model(pair.num_source_classes, cfg.feature_dim, init_rng,
                       cfg.classifier_init_std, cfg.margin_init);
  return {std::move(extractor), std::move(model)};
}

Trainer::Trainer(TrainConfig cfg, const DomainPair& pair)
    : Trainer(cfg, pair, init_params(cfg, pair)) {}

Trainer::Trainer(TrainConfig cfg, const DomainPair& pair, InitBundle init)
    : cfg_(std::move(cfg)),
      pair_(pair),
      extractor_(std::move(init.extractor)),
      model_(std::move(init.model)),
      thresholds_{0.0, 0.0, cfg_.alpha},
      optimizer_(
          cfg_.optim,
          [this] {
            std::vector<Param*> params = extractor_.parameters();
            for (Param* p : model_.parameters()) params.push_back(p);
            return params;
          }(),
          [this] {
            const double cls_wd = cfg_.classifier_weight_decay < 0.0
                                      ? cfg_.optim.weight_decay
                                      : cfg_.classifier_weight_decay;
            std::vector<double> decay(extractor_.parameters().size(), cfg_.optim.weight_decay);
            decay.push_back(cls_wd);  // prototypes
            decay.push_back(cls_wd);  // reciprocals
            decay.push_back(0.0);     // margin
            return decay;
          }(),
          [this] {
            std::vector<double> scale(extractor_.parameters().size(), 1.0);
            scale.push_back(cfg_.classifier_lr_scale);
            scale.push_back(cfg_.classifier_lr_scale);
            scale.push_back(cfg_.classifier_lr_scale);
            return scale;
          }()),
      loop_rng_(cfg_.seed ^ kLoopSeedSalt),
      augment_(resolve_augment(cfg_.augment, pair.target_train)) {}

std::vector<Param*> Trainer::parameters() {
  std::vector<Param*> params = extractor_.parameters();
  for (Param* p : model_.parameters()) params.push_back(p);
  return params;
}

Trainer::TargetForward Trainer::forward_target(Tape& tape, const TargetBatch& tgt) {
  TargetForward fwd;
  const Tape::VarId xw = tape.input(tgt.weak);
  const Tape::VarId xs = tape.input(tgt.strong);
  const Tape::VarId fw = extractor_.forward(tape, xw);
  const Tape::VarId fs = extractor_.forward(tape, xs);
  fwd.weak = classifier_logits(tape, model_, fw);
  fwd.strong = classifier_logits(tape, model_, fs);
  if (!tape.value(fwd.weak.logits_c).all_finite() ||
      !tape.value(fwd.strong.logits_c).all_finite()) {
    throw StateError("non-finite target logits at iteration " + std::to_string(iter_) +
                     "; training diverged");
  }
  // weak view is the fixed consistency target
  const Tensor weak_pc = softmax(tape.value(fwd.weak.logits_c));
  fwd.l_kl = kl_consistency_graph(tape, fwd.strong.logits_c, weak_pc);
  fwd.weak_triples =
      triples_from_logits(tape.value(fwd.weak.logits_p), tape.value(fwd.weak.logits_r));
  fwd.strong_triples =
      triples_from_logits(tape.value(fwd.strong.logits_p), tape.value(fwd.strong.logits_r));
  return fwd;
}

StepStats Trainer::finish_step(Tape& tape, Tape::VarId l_src, Tape::VarId l_trg, StepStats stats,
                               const std::vector<ProbTriple>& weak_triples) {
  const Tape::VarId l_all = tape.add(l_src, l_trg);
  stats.l_src = tape.scalar(l_src);
  stats.l_trg = tape.scalar(l_trg);
  stats.l_all = tape.scalar(l_all);
  if (!std::isfinite(stats.l_all)) {
    std::ostringstream os;
    os << "non-finite loss at iteration " << iter_ << ": l_src=" << stats.l_src
       << " l_kl=" << stats.l_kl << " l_ent=" << stats.l_ent << " l_o_tgt=" << stats.l_o_tgt;
    throw StateError(os.str());
  }
  tape.backward(l_all);
  optimizer_.step();
  model_.clamp_margin();

  // thresholds track the weak-view collaborative confidence in both phases
  const BatchSplit split = split_batch(weak_triples, model_.num_classes());
  update_thresholds(thresholds_, max_pc(weak_triples, split.known),
                    max_pc(weak_triples, split.unknown));
  stats.rho_c = thresholds_.rho_c;
  stats.rho_o = thresholds_.rho_o;
  ++iter_;
  return stats;
}

StepStats Trainer::step_warmup(const SourceBatch& src, const TargetBatch& tgt) {
  StepStats stats;
  stats.iter = iter_;
  stats.warmup = true;

  Tape tape;
  const Tape::VarId xs = tape.input(src.x);
  const Tape::VarId fs = extractor_.forward(tape, xs);
  const ClassifierVars src_vars = classifier_logits(tape, model_, fs);
  const Tape::VarId l_src = source_loss_graph(tape, model_, src_vars, src.y, cfg_.lambda,
                                              !cfg_.ablation.disable_split);
  TargetForward fwd = forward_target(tape, tgt);
  stats.l_kl = tape.scalar(fwd.l_kl);
  return finish_step(tape, l_src, fwd.l_kl, stats, fwd.weak_triples);
}

StepStats Trainer::step_adapt(const SourceBatch& src, const TargetBatch& tgt) {
  StepStats stats;
  stats.iter = iter_;
  stats.warmup = false;

  Tape tape;
  const Tape::VarId xs = tape.input(src.x);
  const Tape::VarId fs = extractor_.forward(tape, xs);
  const ClassifierVars src_vars = classifier_logits(tape, model_, fs);
  const Tape::VarId l_src = source_loss_graph(tape, model_, src_vars, src.y, cfg_.lambda,
                                              !cfg_.ablation.disable_split);
  TargetForward fwd = forward_target(tape, tgt);
  stats.l_kl = tape.scalar(fwd.l_kl);

  SelectionCriteria criteria;
  criteria.use_threshold = !cfg_.ablation.disable_threshold_criterion;
  criteria.use_consistency = !cfg_.ablation.disable_consistency_criterion;
  const SelectedSets sets =
      select_confident(fwd.weak_triples, fwd.strong_triples, thresholds_, criteria);
  stats.n_sel_known = static_cast<int>(sets.known.size());
  stats.n_sel_unknown = static_cast<int>(sets.unknown.size());

  // split selected entries by view so rows index the right logits matrix
  const auto view_rows = [](const std::vector<SelectedEntry>& entries, View view) {
    std::vector<int> rows;
    for (const SelectedEntry& e : entries) {
      if (e.view == view) rows.push_back(e.index);
    }
    return rows;
  };
  const auto view_labels = [](const std::vector<SelectedEntry>& entries,
                              const std::vector<int>& labels, View view) {
    std::vector<int> out;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].view == view) out.push_back(labels[i]);
    }
    return out;
  };

  Tape::VarId l_trg = fwd.l_kl;

  // weighted entropy over the selected sets; an empty set contributes nothing
  const double nk = static_cast<double>(sets.known.size());
  const double nu = static_cast<double>(sets.unknown.size());
  if (nk + nu > 0.0) {
    const double w = cfg_.ablation.disable_entropy_weighting ? 0.5 : nu / (nk + nu);
    const auto mean_entropy = [&](const std::vector<SelectedEntry>& entries,
                                  double count) -> Tape::VarId {
      const std::vector<int> weak_rows = view_rows(entries, View::weak);
      const std::vector<int> strong_rows = view_rows(entries, View::strong);
      Tape::VarId total = -1;
      if (!weak_rows.empty()) total = entropy_sum_graph(tape, fwd.weak.logits_c, weak_rows);
      if (!strong_rows.empty()) {
        const Tape::VarId s = entropy_sum_graph(tape, fwd.strong.logits_c, strong_rows);
        total = total < 0 ? s : tape.add(total, s);
      }
      return tape.scale(total, 1.0 / count);
    };
    Tape::VarId l_ent = -1;
    if (nk > 0.0) l_ent = tape.scale(mean_entropy(sets.known, nk), w);
    if (nu > 0.0) {
      const Tape::VarId u = tape.scale(mean_entropy(sets.unknown, nu), 1.0 - w);
      l_ent = l_ent < 0 ? u : tape.add(l_ent, u);
    }
    stats.l_ent = tape.scalar(l_ent);
    l_trg = tape.add(l_trg, l_ent);
  }

  // open-space loss on pseudo-known target samples, mean over B̂_c entries
  if (!sets.known.empty()) {
    const Tape::VarId margin = tape.param(model_.margin());
    const std::vector<int> weak_rows = view_rows(sets.known, View::weak);
    const std::vector<int> strong_rows = view_rows(sets.known, View::strong);
    Tape::VarId total = -1;
    if (!weak_rows.empty()) {
      total = open_loss_sum_graph(tape, fwd.weak.logits_r, margin, weak_rows,
                                  view_labels(sets.known, sets.known_pseudo_labels, View::weak));
    }
    if (!strong_rows.empty()) {
      const Tape::VarId s =
          open_loss_sum_graph(tape, fwd.strong.logits_r, margin, strong_rows,
                              view_labels(sets.known, sets.known_pseudo_labels, View::strong));
      total = total < 0 ? s : tape.add(total, s);
    }
    const Tape::VarId l_open = tape.scale(total, 1.0 / nk);
    stats.l_o_tgt = tape.scalar(l_open);
    l_trg = tape.add(l_trg, tape.scale(l_open, cfg_.lambda));
  }

  return finish_step(tape, l_src, l_trg, stats, fwd.weak_triples);
}

StepStats Trainer::step(const SourceBatch& src, const TargetBatch& tgt) {
  return iter_ < effective_warmup() ? step_warmup(src, tgt) : step_adapt(src, tgt);
}

RunResult Trainer::run(const std::function<void(const std::string&)>& sink) {
  RunResult result;
  BatchSampler sampler(pair_.source, pair_.target_train, augment_, cfg_.batch_size, loop_rng_);
  while (iter_ < cfg_.total_iters) {
    auto [src, tgt] = sampler.next();
    const StepStats stats = step(src, tgt);
    const bool eval_now =
        (stats.iter + 1) % cfg_.eval_interval == 0 || stats.iter + 1 == cfg_.total_iters;
    const EvalReport* report = nullptr;
    if (eval_now) {
      result.evals.emplace_back(
          stats.iter, evaluate(extractor_, model_, pair_.target_eval, pair_.num_source_classes));
      report = &result.evals.back().second;
    }
    if (sink) sink(metrics_line(stats, report));
    result.steps.push_back(stats);
  }
  if (result.evals.empty()) {
    result.final_eval = evaluate(extractor_, model_, pair_.target_eval, pair_.num_source_classes);
  } else {
    result.final_eval = result.evals.back().second;
  }
  return result;
}

std::string metrics_line(const StepStats& s, const EvalReport* eval) {
  nlohmann::ordered_json j;
  j["iter"] = s.iter;
  j["phase"] = s.warmup ? "warmup" : "adapt";
  j["l_src"] = s.l_src;
  j["l_kl"] = s.l_kl;
  j["l_ent"] = s.l_ent;
  j["l_o_tgt"] = s.l_o_tgt;
  j["l_trg"] = s.l_trg;
  j["l_all"] = s.l_all;
  j["rho_c"] = s.rho_c;
  j["rho_o"] = s.rho_o;
  j["n_sel_known"] = s.n_sel_known;
  j["n_sel_unknown"] = s.n_sel_unknown;
  if (eval != nullptr) {
    j["h_score"] = eval->h_score;
    j["acc_known"] = eval->acc_common;
    j["acc_unknown"] = eval->acc_unknown;
  }
  return j.dump();
}

}  // namespace cpr
