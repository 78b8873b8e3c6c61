#include "cpr/selection.hpp"

#include "cpr/error.hpp"

namespace cpr {

BatchSplit split_batch(const std::vector<ProbTriple>& triples, int num_classes) {
  BatchSplit split;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const ProbTriple& t = triples[i];
    if (static_cast<int>(t.p_c.size()) != 2 * num_classes) {
      throw ConfigError("split_batch: p_c must have 2K entries");
    }
    if (argmax(t.p_c) < num_classes) {
      split.known.push_back(static_cast<int>(i));
    } else {
      split.unknown.push_back(static_cast<int>(i));
    }
  }
  return split;
}

std::vector<double> max_pc(const std::vector<ProbTriple>& triples, const std::vector<int>& idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(max_value(triples[i].p_c));
  return out;
}

void update_thresholds(ThresholdState& state, const std::vector<double>& max_pc_known,
                       const std::vector<double>& max_pc_unknown) {
  if (state.alpha <= 0.0 || state.alpha >= 1.0) throw ConfigError("alpha must be in (0,1)");
  const auto ema = [&state](double rho, const std::vector<double>& vals) {
    if (vals.empty()) return rho;
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    return state.alpha * rho + (1.0 - state.alpha) * mean;
  };
  state.rho_c = ema(state.rho_c, max_pc_known);
  state.rho_o = ema(state.rho_o, max_pc_unknown);
}

SelectedSets select_confident(const std::vector<ProbTriple>& weak,
                              const std::vector<ProbTriple>& strong, const ThresholdState& state,
                              SelectionCriteria criteria) {
  if (weak.size() != strong.size()) {
    throw ConfigError("select_confident: weak and strong views must align");
  }
  SelectedSets sets;
  for (std::size_t i = 0; i < weak.size(); ++i) {
    const ProbTriple& w = weak[i];
    const int k = static_cast<int>(w.p_p.size());
    // candidates come from B_c / B_o respectively
    const bool in_known_half = argmax(w.p_c) < k;
    const double conf = max_value(w.p_c);
    const bool consistent = argmax(w.p_p) == argmax(w.p_r);
    const bool strong_matches = argmax(strong[i].p_c) == argmax(w.p_c);

    if (in_known_half) {
      const bool pass = (!criteria.use_threshold || conf >= state.rho_c) &&
                        (!criteria.use_consistency || consistent);
      if (pass) {
        const int pseudo = argmax(w.p_p);
        sets.known.push_back({static_cast<int>(i), View::weak});
        sets.known_pseudo_labels.push_back(pseudo);
        if (strong_matches) {
          sets.known.push_back({static_cast<int>(i), View::strong});
          sets.known_pseudo_labels.push_back(pseudo);
        }
      }
    } else {
      const bool pass = (!criteria.use_threshold || conf >= state.rho_o) &&
                        (!criteria.use_consistency || !consistent);
      if (pass) {
        sets.unknown.push_back({static_cast<int>(i), View::weak});
        if (strong_matches) {
          sets.unknown.push_back({static_cast<int>(i), View::strong});
        }
      }
    }
  }
  return sets;
}

}  // namespace cpr
