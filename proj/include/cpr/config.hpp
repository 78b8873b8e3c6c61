#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cpr/data.hpp"
#include "cpr/trainer.hpp"

namespace cpr {

// One config document per run. Every field has a default; unknown keys are
// rejected with the offending key named. The fully resolved document is
// written alongside every output artifact.
struct RunConfig {
  // data generation
  SplitSpec split;
  int dim = 32;
  int samples_per_class = 50;
  ShiftSpec shift;
  std::uint64_t data_seed = 1;

  TrainConfig train;

  // source-only baseline: unknown iff H(p) >= frac * log(K)
  double baseline_entropy_threshold_frac = 0.5;

  // sweep / ablation trial plans
  std::vector<int> sweep_n_tgt_private = {5, 10, 15, 20};
  std::vector<std::uint64_t> sweep_seeds = {1, 2, 3};
  int ablate_num_seeds = 5;

  static RunConfig from_json_text(const std::string& text, const std::string& origin = "config");
  static RunConfig from_json_file(const std::string& path);
  std::string to_json() const;  // normalized, fully resolved

  void validate() const;
};

}  // namespace cpr
