#pragma once

#include <vector>

#include "cpr/model.hpp"

namespace cpr {

// Exponential-moving-average confidence thresholds, both starting at 0 and
// updated in every phase. An empty candidate set leaves its threshold as is.
struct ThresholdState {
  double rho_c = 0.0;
  double rho_o = 0.0;
  double alpha = 0.99;
};

// B_c / B_o: argmax(p_c) < K goes known, otherwise unknown.
struct BatchSplit {
  std::vector<int> known;
  std::vector<int> unknown;
};

BatchSplit split_batch(const std::vector<ProbTriple>& triples, int num_classes);

std::vector<double> max_pc(const std::vector<ProbTriple>& triples, const std::vector<int>& idx);

// rho <- alpha * rho + (1 - alpha) * mean(max p_c) over the respective set.
void update_thresholds(ThresholdState& state, const std::vector<double>& max_pc_known,
                       const std::vector<double>& max_pc_unknown);

enum class View { weak, strong };

struct SelectedEntry {
  int index;  // position in the batch
  View view;
};

// B̂_c / B̂_o with view tags. Every strong entry has its weak sibling in the
// same set. known_pseudo_labels aligns with known: argmax(p_p) of the weak
// view, shared by the strong sibling.
struct SelectedSets {
  std::vector<SelectedEntry> known;
  std::vector<SelectedEntry> unknown;
  std::vector<int> known_pseudo_labels;
};

struct SelectionCriteria {
  bool use_threshold = true;
  bool use_consistency = true;
};

// Stage 1 (weak views): join B̂_c iff max(p_c) >= rho_c and
// argmax(p_p) == argmax(p_r); join B̂_o iff max(p_c) >= rho_o and the argmaxes
// differ. Stage 2 (strong views): the strong sibling of a selected weak sample
// joins the same set iff argmax of its p_c matches the weak view's.
SelectedSets select_confident(const std::vector<ProbTriple>& weak,
                              const std::vector<ProbTriple>& strong, const ThresholdState& state,
                              SelectionCriteria criteria = {});

}  // namespace cpr
