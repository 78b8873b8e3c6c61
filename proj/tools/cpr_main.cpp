#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"

#include "cpr/checkpoint.hpp"
#include "cpr/config.hpp"
#include "cpr/experiments.hpp"

using namespace cpr;

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << text;
  if (!text.empty() && text.back() != '\n') out << "\n";
}

void write_resolved_config(const std::string& out_dir, const RunConfig& cfg) {
  std::filesystem::create_directories(out_dir);
  write_text(out_dir + "/resolved_config.json", cfg.to_json());
}

RunConfig load_config(const std::string& path) {
  if (path.empty()) return RunConfig{};
  return RunConfig::from_json_file(path);
}

struct AblationCli {
  bool no_split = false;
  bool no_warmup = false;
  bool no_consistency = false;
  bool no_threshold = false;

  void add_flags(CLI::App* cmd) {
    cmd->add_flag("--no-split", no_split, "drop the split loss from the source objective");
    cmd->add_flag("--no-warmup", no_warmup, "start the adaptation phase immediately");
    cmd->add_flag("--no-consistency-criterion", no_consistency,
                  "drop the argmax-agreement test from selection");
    cmd->add_flag("--no-threshold-criterion", no_threshold,
                  "drop the confidence-threshold test from selection");
  }
  void apply(RunConfig& cfg) const {
    if (no_split) cfg.train.ablation.disable_split = true;
    if (no_warmup) cfg.train.ablation.disable_warmup = true;
    if (no_consistency) cfg.train.ablation.disable_consistency_criterion = true;
    if (no_threshold) cfg.train.ablation.disable_threshold_criterion = true;
  }
};

int cmd_gen_data(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed) {
  RunConfig cfg = load_config(config_path);
  if (seed) cfg.data_seed = *seed;
  const DomainPair pair = generate_pair(cfg);
  save_domain_pair(pair, out_dir);
  write_resolved_config(out_dir, cfg);
  std::cout << "wrote " << pair.source.size() << " source and " << pair.target_train.size()
            << " target samples to " << out_dir << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_dir,
              const std::string& out_dir, std::optional<std::uint64_t> seed,
              const std::string& resume_dir, const AblationCli& ablation) {
  RunConfig cfg = resume_dir.empty()
                      ? load_config(config_path)
                      : RunConfig::from_json_text(checkpoint_config_json(resume_dir),
                                                  resume_dir + "/checkpoint.json");
  if (seed) cfg.train.seed = *seed;
  ablation.apply(cfg);

  const DomainPair pair = load_domain_pair(data_dir);
  Trainer trainer(cfg.train, pair);
  if (!resume_dir.empty()) restore_checkpoint(resume_dir, trainer);

  write_resolved_config(out_dir, cfg);
  std::ofstream metrics(out_dir + "/metrics.jsonl",
                        resume_dir.empty() ? std::ios::trunc : std::ios::app);
  if (!metrics) throw ParseError(out_dir + "/metrics.jsonl: cannot open for writing");

  const RunResult result = trainer.run([&](const std::string& line) { metrics << line << "\n"; });
  metrics.flush();
  save_checkpoint(out_dir, trainer, cfg.to_json());
  std::cout << "final h_score " << result.final_eval.h_score << " (acc_common "
            << result.final_eval.acc_common << ", acc_unknown " << result.final_eval.acc_unknown
            << ")\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint_dir, const std::string& data_dir,
             const std::string& out_dir) {
  const RunConfig cfg = RunConfig::from_json_text(checkpoint_config_json(checkpoint_dir),
                                                  checkpoint_dir + "/checkpoint.json");
  const DomainPair pair = load_domain_pair(data_dir);
  Trainer trainer(cfg.train, pair);
  restore_checkpoint(checkpoint_dir, trainer);
  const EvalReport report =
      evaluate(trainer.extractor(), trainer.model(), pair.target_eval, pair.num_source_classes);
  std::cout << report.to_json() << "\n";
  if (!out_dir.empty()) {
    write_resolved_config(out_dir, cfg);
    write_text(out_dir + "/report.json", report.to_json());
    write_histogram_csv(anomaly_histogram(report, 30), out_dir + "/anomaly_histogram.csv");
    export_features(trainer.extractor(), trainer.model(), pair.target_eval,
                    out_dir + "/features.csv");
  }
  return 0;
}

int cmd_ablate(const std::string& config_path, const std::string& data_dir,
               const std::string& out_dir, std::optional<int> num_seeds) {
  RunConfig cfg = load_config(config_path);
  const DomainPair pair = data_dir.empty() ? generate_pair(cfg) : load_domain_pair(data_dir);
  const int seeds = num_seeds.value_or(cfg.ablate_num_seeds);
  const auto rows = run_ablation_table(cfg, pair, seeds);
  write_resolved_config(out_dir, cfg);
  const std::string csv = ablation_table_csv(rows);
  write_text(out_dir + "/ablation.csv", csv);
  std::cout << csv;
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir) {
  RunConfig cfg = load_config(config_path);
  const auto rows = run_unknown_class_sweep(cfg);
  write_resolved_config(out_dir, cfg);
  const std::string csv = sweep_table_csv(rows);
  write_text(out_dir + "/sweep.csv", csv);
  std::cout << csv;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CPR: dual prototype/reciprocal classifiers for universal domain adaptation"};
  app.require_subcommand(1);

  std::string config_path, data_dir, out_dir, checkpoint_dir, resume_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> num_seeds;
  AblationCli ablation;

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic domain pair");
  gen->add_option("--config", config_path, "config file (json)");
  gen->add_option("--out", out_dir, "output directory")->required();
  gen->add_option("--seed", seed, "override the data seed");

  auto* train = app.add_subcommand("train", "train CPR on a domain pair");
  train->add_option("--config", config_path, "config file (json)");
  train->add_option("--data", data_dir, "data directory (source.csv, target_*.csv)")->required();
  train->add_option("--out", out_dir, "output directory")->required();
  train->add_option("--seed", seed, "override the training seed");
  train->add_option("--resume", resume_dir, "checkpoint directory to resume from");
  ablation.add_flags(train);

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint, report on stdout");
  eval_cmd->add_option("--checkpoint", checkpoint_dir, "checkpoint directory")->required();
  eval_cmd->add_option("--data", data_dir, "data directory")->required();
  eval_cmd->add_option("--out", out_dir, "also write report, histogram and features here");

  auto* ablate = app.add_subcommand("ablate", "compare full CPR against ablations over seeds");
  ablate->add_option("--config", config_path, "config file (json)");
  ablate->add_option("--data", data_dir, "data directory (generated from config when omitted)");
  ablate->add_option("--out", out_dir, "output directory")->required();
  ablate->add_option("--num-seeds", num_seeds, "seeds per variant");

  auto* sweep = app.add_subcommand("sweep", "h-score across unknown-class counts");
  sweep->add_option("--config", config_path, "config file (json)");
  sweep->add_option("--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_data(config_path, out_dir, seed);
    if (train->parsed()) return cmd_train(config_path, data_dir, out_dir, seed, resume_dir, ablation);
    if (eval_cmd->parsed()) return cmd_eval(checkpoint_dir, data_dir, out_dir);
    if (ablate->parsed()) return cmd_ablate(config_path, data_dir, out_dir, num_seeds);
    if (sweep->parsed()) return cmd_sweep(config_path, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
