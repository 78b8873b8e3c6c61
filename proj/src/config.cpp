#include "cpr/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "cpr/error.hpp"

namespace cpr {

namespace {

using ordered_json = nlohmann::ordered_json;

void reject_unknown_keys(const ordered_json& obj, const std::set<std::string>& known,
                         const std::string& section) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key)) {
      throw ConfigError("unknown config key '" + section + key + "'");
    }
  }
}

template <typename T>
void read(const ordered_json& obj, const char* key, T& out) {
  if (obj.contains(key)) {
    try {
      out = obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(std::string("config key '") + key + "' has the wrong type");
    }
  }
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text, const std::string& origin) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(origin + ": " + e.what());
  }
  RunConfig cfg;

  reject_unknown_keys(j, {"data", "model", "optim", "augment", "train", "baseline", "sweep", "ablate"}, "");

  if (j.contains("data")) {
    const auto& d = j["data"];
    reject_unknown_keys(d,
                        {"n_common", "n_src_private", "n_tgt_private", "dim", "samples_per_class",
                         "rotation_angle", "translation_scale", "noise_std", "seed"},
                        "data.");
    read(d, "n_common", cfg.split.n_common);
    read(d, "n_src_private", cfg.split.n_src_private);
    read(d, "n_tgt_private", cfg.split.n_tgt_private);
    read(d, "dim", cfg.dim);
    read(d, "samples_per_class", cfg.samples_per_class);
    read(d, "rotation_angle", cfg.shift.rotation_angle);
    read(d, "translation_scale", cfg.shift.translation_scale);
    read(d, "noise_std", cfg.shift.noise_std);
    read(d, "seed", cfg.data_seed);
  }
  if (j.contains("model")) {
    const auto& m = j["model"];
    reject_unknown_keys(m, {"hidden_dims", "feature_dim", "init_std", "margin_init"}, "model.");
    read(m, "hidden_dims", cfg.train.hidden_dims);
    read(m, "feature_dim", cfg.train.feature_dim);
    read(m, "init_std", cfg.train.classifier_init_std);
    read(m, "margin_init", cfg.train.margin_init);
  }
  if (j.contains("optim")) {
    const auto& o = j["optim"];
    reject_unknown_keys(o,
                        {"learning_rate", "momentum", "weight_decay", "classifier_weight_decay",
                         "classifier_lr_scale"},
                        "optim.");
    read(o, "learning_rate", cfg.train.optim.learning_rate);
    read(o, "momentum", cfg.train.optim.momentum);
    read(o, "weight_decay", cfg.train.optim.weight_decay);
    read(o, "classifier_weight_decay", cfg.train.classifier_weight_decay);
    read(o, "classifier_lr_scale", cfg.train.classifier_lr_scale);
  }
  if (j.contains("augment")) {
    const auto& a = j["augment"];
    reject_unknown_keys(
        a, {"sigma_weak_scale", "sigma_strong_scale", "p_drop", "scale_jitter"}, "augment.");
    read(a, "sigma_weak_scale", cfg.train.augment.sigma_weak_scale);
    read(a, "sigma_strong_scale", cfg.train.augment.sigma_strong_scale);
    read(a, "p_drop", cfg.train.augment.p_drop);
    read(a, "scale_jitter", cfg.train.augment.scale_jitter);
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    reject_unknown_keys(t,
                        {"lambda", "alpha", "warmup_iters", "total_iters", "batch_size",
                         "eval_interval", "seed", "disable_split", "disable_warmup",
                         "disable_consistency_criterion", "disable_threshold_criterion",
                         "disable_entropy_weighting"},
                        "train.");
    read(t, "lambda", cfg.train.lambda);
    read(t, "alpha", cfg.train.alpha);
    read(t, "warmup_iters", cfg.train.warmup_iters);
    read(t, "total_iters", cfg.train.total_iters);
    read(t, "batch_size", cfg.train.batch_size);
    read(t, "eval_interval", cfg.train.eval_interval);
    read(t, "seed", cfg.train.seed);
    read(t, "disable_split", cfg.train.ablation.disable_split);
    read(t, "disable_warmup", cfg.train.ablation.disable_warmup);
    read(t, "disable_consistency_criterion", cfg.train.ablation.disable_consistency_criterion);
    read(t, "disable_threshold_criterion", cfg.train.ablation.disable_threshold_criterion);
    read(t, "disable_entropy_weighting", cfg.train.ablation.disable_entropy_weighting);
  }
  if (j.contains("baseline")) {
    const auto& b = j["baseline"];
    reject_unknown_keys(b, {"entropy_threshold_frac"}, "baseline.");
    read(b, "entropy_threshold_frac", cfg.baseline_entropy_threshold_frac);
  }
  if (j.contains("sweep")) {
    const auto& s = j["sweep"];
    reject_unknown_keys(s, {"n_tgt_private", "seeds"}, "sweep.");
    read(s, "n_tgt_private", cfg.sweep_n_tgt_private);
    read(s, "seeds", cfg.sweep_seeds);
  }
  if (j.contains("ablate")) {
    const auto& a = j["ablate"];
    reject_unknown_keys(a, {"num_seeds"}, "ablate.");
    read(a, "num_seeds", cfg.ablate_num_seeds);
  }

  cfg.validate();
  return cfg;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str(), path);
}

std::string RunConfig::to_json() const {
  ordered_json j;
  j["data"] = {{"n_common", split.n_common},
               {"n_src_private", split.n_src_private},
               {"n_tgt_private", split.n_tgt_private},
               {"dim", dim},
               {"samples_per_class", samples_per_class},
               {"rotation_angle", shift.rotation_angle},
               {"translation_scale", shift.translation_scale},
               {"noise_std", shift.noise_std},
               {"seed", data_seed}};
  j["model"] = {{"hidden_dims", train.hidden_dims},
                {"feature_dim", train.feature_dim},
                {"init_std", train.classifier_init_std},
                {"margin_init", train.margin_init}};
  j["optim"] = {{"learning_rate", train.optim.learning_rate},
                {"momentum", train.optim.momentum},
                {"weight_decay", train.optim.weight_decay},
                {"classifier_weight_decay", train.classifier_weight_decay},
                {"classifier_lr_scale", train.classifier_lr_scale}};
  j["augment"] = {{"sigma_weak_scale", train.augment.sigma_weak_scale},
                  {"sigma_strong_scale", train.augment.sigma_strong_scale},
                  {"p_drop", train.augment.p_drop},
                  {"scale_jitter", train.augment.scale_jitter}};
  j["train"] = {{"lambda", train.lambda},
                {"alpha", train.alpha},
                {"warmup_iters", train.warmup_iters},
                {"total_iters", train.total_iters},
                {"batch_size", train.batch_size},
                {"eval_interval", train.eval_interval},
                {"seed", train.seed},
                {"disable_split", train.ablation.disable_split},
                {"disable_warmup", train.ablation.disable_warmup},
                {"disable_consistency_criterion", train.ablation.disable_consistency_criterion},
                {"disable_threshold_criterion", train.ablation.disable_threshold_criterion},
                {"disable_entropy_weighting", train.ablation.disable_entropy_weighting}};
  j["baseline"] = {{"entropy_threshold_frac", baseline_entropy_threshold_frac}};
  j["sweep"] = {{"n_tgt_private", sweep_n_tgt_private}, {"seeds", sweep_seeds}};
  j["ablate"] = {{"num_seeds", ablate_num_seeds}};
  return j.dump(2);
}

void RunConfig::validate() const {
  train.validate();
  if (split.n_common < 1) throw ConfigError("config key 'data.n_common' must be >= 1");
  if (split.n_src_private < 0 || split.n_tgt_private < 0) {
    throw ConfigError("config keys 'data.n_*_private' must be non-negative");
  }
  if (dim < 2) throw ConfigError("config key 'data.dim' must be >= 2");
  if (samples_per_class < 4) throw ConfigError("config key 'data.samples_per_class' must be >= 4");
  if (baseline_entropy_threshold_frac <= 0.0 || baseline_entropy_threshold_frac >= 1.0) {
    throw ConfigError("config key 'baseline.entropy_threshold_frac' must be in (0,1)");
  }
  if (sweep_n_tgt_private.empty() || sweep_seeds.empty()) {
    throw ConfigError("config section 'sweep' must name at least one point and one seed");
  }
  if (ablate_num_seeds < 1) throw ConfigError("config key 'ablate.num_seeds' must be >= 1");
}

}  // namespace cpr
