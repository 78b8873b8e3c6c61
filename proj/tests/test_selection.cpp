#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cpr/kernels.hpp"
#include "cpr/rng.hpp"
#include "cpr/selection.hpp"

#include "oracles.hpp"

using namespace cpr;

namespace {

// build a triple straight from collaborative logits (K = half)
ProbTriple triple_from_collab(const std::vector<double>& logits_p,
                              const std::vector<double>& logits_r) {
  ProbTriple t;
  t.logits_p = Tensor::vec(logits_p);
  t.logits_r = Tensor::vec(logits_r);
  std::vector<double> neg(logits_r);
  for (double& v : neg) v = -v;
  t.p_p = softmax(t.logits_p);
  t.p_r = softmax(Tensor::vec(neg));
  std::vector<double> collab(logits_p);
  collab.insert(collab.end(), logits_r.begin(), logits_r.end());
  t.p_c = softmax(Tensor::vec(collab));
  return t;
}

std::vector<ProbTriple> random_triples(int n, int k, Rng& rng) {
  std::vector<ProbTriple> ts;
  for (int i = 0; i < n; ++i) {
    std::vector<double> lp(k), lr(k);
    for (double& v : lp) v = rng.uniform(-3.0, 3.0);
    for (double& v : lr) v = rng.uniform(-3.0, 3.0);
    ts.push_back(triple_from_collab(lp, lr));
  }
  return ts;
}

oracle::Probs to_oracle(const ProbTriple& t) {
  return {oracle::to_vec(t.p_p), oracle::to_vec(t.p_r), oracle::to_vec(t.p_c)};
}

}  // namespace

TEST_CASE("split_batch applies the argmax rule") {
  // K=3: argmax at index 1 -> known
  const ProbTriple known = triple_from_collab({0.0, 4.0, 0.0}, {0.0, 0.0, 0.0});
  // argmax at index 4 (reciprocal half) -> unknown
  const ProbTriple unknown = triple_from_collab({0.0, 0.0, 0.0}, {0.0, 4.0, 0.0});
  const BatchSplit split = split_batch({known, unknown}, 3);
  REQUIRE(split.known.size() == 1);
  REQUIRE(split.unknown.size() == 1);
  CHECK(split.known[0] == 0);
  CHECK(split.unknown[0] == 1);
}

TEST_CASE("split_batch partitions every batch") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 2 + rng.uniform_int(4);
    const auto triples = random_triples(8, k, rng);
    const BatchSplit split = split_batch(triples, k);
    CHECK(split.known.size() + split.unknown.size() == 8);
    for (int i : split.known) CHECK(argmax(triples[i].p_c) < k);
    for (int i : split.unknown) CHECK(argmax(triples[i].p_c) >= k);
  }
}

TEST_CASE("threshold update follows the moving average") {
  ThresholdState state;
  CHECK(state.rho_c == 0.0);
  CHECK(state.rho_o == 0.0);
  CHECK(state.alpha == 0.99);

  update_thresholds(state, {0.8}, {});
  CHECK(state.rho_c == doctest::Approx(0.008).epsilon(1e-12));
  CHECK(state.rho_o == 0.0);  // empty set leaves the threshold unchanged

  update_thresholds(state, {}, {0.6, 0.8});
  CHECK(state.rho_c == doctest::Approx(0.008).epsilon(1e-12));
  CHECK(state.rho_o == doctest::Approx(0.01 * 0.7).epsilon(1e-12));

  ThresholdState bad{0.0, 0.0, 1.0};
  CHECK_THROWS_AS(update_thresholds(bad, {0.5}, {}), ConfigError);
}

TEST_CASE("thresholds stay in the unit interval and approach a constant mean") {
  ThresholdState state;
  for (int it = 0; it < 2000; ++it) {
    update_thresholds(state, {0.9}, {0.4});
    CHECK(state.rho_c >= 0.0);
    CHECK(state.rho_c < 1.0);
    CHECK(state.rho_o >= 0.0);
    CHECK(state.rho_o < 1.0);
  }
  CHECK(state.rho_c == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(state.rho_o == doctest::Approx(0.4).epsilon(1e-6));
}

TEST_CASE("select_confident manual traces") {
  // consistent, confident, candidate-known sample: prototype 2 dominates and
  // reciprocal 2 is the farthest
  const ProbTriple weak = triple_from_collab({0.0, 0.0, 3.0}, {0.5, 0.5, -2.0});
  REQUIRE(argmax(weak.p_p) == 2);
  REQUIRE(argmax(weak.p_r) == 2);
  REQUIRE(argmax(weak.p_c) == 2);

  ThresholdState state;
  state.rho_c = 0.7;
  state.rho_o = 0.7;
  REQUIRE(max_value(weak.p_c) >= 0.7);

  SUBCASE("strong view with matching argmax joins too") {
    const ProbTriple strong = triple_from_collab({0.0, 0.0, 2.5}, {0.4, 0.4, -1.0});
    REQUIRE(argmax(strong.p_c) == 2);
    const SelectedSets sets = select_confident({weak}, {strong}, state);
    REQUIRE(sets.known.size() == 2);
    CHECK(sets.known[0].view == View::weak);
    CHECK(sets.known[1].view == View::strong);
    CHECK(sets.known[0].index == 0);
    CHECK(sets.known_pseudo_labels == std::vector<int>{2, 2});
    CHECK(sets.unknown.empty());
  }
  SUBCASE("strong view with mismatched argmax is excluded") {
    const ProbTriple strong = triple_from_collab({3.0, 0.0, 0.0}, {0.0, 0.0, 0.0});
    REQUIRE(argmax(strong.p_c) == 0);
    const SelectedSets sets = select_confident({weak}, {strong}, state);
    REQUIRE(sets.known.size() == 1);
    CHECK(sets.known[0].view == View::weak);
  }
  SUBCASE("below both thresholds selects nothing") {
    ThresholdState high;
    high.rho_c = 0.999;
    high.rho_o = 0.999;
    const SelectedSets sets = select_confident({weak}, {weak}, high);
    CHECK(sets.known.empty());
    CHECK(sets.unknown.empty());
  }
  SUBCASE("inconsistent unknown-half sample joins the unknown set") {
    // reciprocal 0 dominates p_c; farthest reciprocal is 2, nearest prototype 1
    const ProbTriple u = triple_from_collab({0.0, 1.0, 0.0}, {4.0, 0.5, -2.0});
    REQUIRE(argmax(u.p_c) == 3);
    REQUIRE(argmax(u.p_p) == 1);
    REQUIRE(argmax(u.p_r) == 2);
    ThresholdState st;
    st.rho_o = 0.5;
    const SelectedSets sets = select_confident({u}, {u}, st);
    CHECK(sets.unknown.size() == 2);  // weak + matching strong view
    CHECK(sets.known.empty());
  }
}

TEST_CASE("candidates come from their own half of the split") {
  // consistent sample whose collaborative argmax lands in the reciprocal half:
  // eligible for neither set
  const ProbTriple t = triple_from_collab({0.0, 0.0, 1.0}, {2.0, 0.0, -5.0});
  REQUIRE(argmax(t.p_p) == 2);
  REQUIRE(argmax(t.p_r) == 2);
  REQUIRE(argmax(t.p_c) == 3);
  ThresholdState state;  // thresholds at zero pass everything
  const SelectedSets sets = select_confident({t}, {t}, state);
  CHECK(sets.known.empty());
  CHECK(sets.unknown.empty());
}

TEST_CASE("with zero thresholds selection reduces to the consistency criterion") {
  Rng rng(9);
  const ThresholdState zero;  // rho_c = rho_o = 0, frozen
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 2 + rng.uniform_int(4);
    const auto weak = random_triples(10, k, rng);
    const auto strong = random_triples(10, k, rng);
    const SelectedSets sets = select_confident(weak, strong, zero);

    SelectionCriteria no_thr;
    no_thr.use_threshold = false;
    const SelectedSets ablated = select_confident(weak, strong, zero, no_thr);
    REQUIRE(sets.known.size() == ablated.known.size());
    REQUIRE(sets.unknown.size() == ablated.unknown.size());
    for (std::size_t i = 0; i < sets.known.size(); ++i) {
      CHECK(sets.known[i].index == ablated.known[i].index);
      CHECK((sets.known[i].view == ablated.known[i].view));
    }
    // every weak view lands in exactly one set or is rejected purely by the
    // consistency test disagreeing with its half
    for (int i = 0; i < 10; ++i) {
      const bool in_known_half = argmax(weak[i].p_c) < k;
      const bool consistent = argmax(weak[i].p_p) == argmax(weak[i].p_r);
      int memberships = 0;
      for (const auto& e : sets.known) {
        if (e.index == i && e.view == View::weak) ++memberships;
      }
      for (const auto& e : sets.unknown) {
        if (e.index == i && e.view == View::weak) ++memberships;
      }
      CHECK(memberships == (in_known_half == consistent ? 1 : 0));
    }
  }
}

TEST_CASE("selector matches the oracle and is deterministic") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 2 + rng.uniform_int(4);
    const int n = 1 + rng.uniform_int(8);
    const auto weak = random_triples(n, k, rng);
    const auto strong = random_triples(n, k, rng);
    ThresholdState state;
    state.rho_c = rng.uniform(0.0, 0.9);
    state.rho_o = rng.uniform(0.0, 0.9);

    const SelectedSets sets = select_confident(weak, strong, state);
    const SelectedSets again = select_confident(weak, strong, state);
    REQUIRE(sets.known.size() == again.known.size());
    REQUIRE(sets.unknown.size() == again.unknown.size());

    std::vector<oracle::Probs> ow, os;
    for (const auto& t : weak) ow.push_back(to_oracle(t));
    for (const auto& t : strong) os.push_back(to_oracle(t));
    const oracle::Selected expect = oracle::select(ow, os, state.rho_c, state.rho_o);

    REQUIRE(sets.known.size() == expect.known.size());
    REQUIRE(sets.unknown.size() == expect.unknown.size());
    for (std::size_t i = 0; i < sets.known.size(); ++i) {
      CHECK(sets.known[i].index == expect.known[i].first);
      CHECK((sets.known[i].view == View::strong) == (expect.known[i].second == 1));
      CHECK(sets.known_pseudo_labels[i] == expect.pseudo[i]);
    }
    for (std::size_t i = 0; i < sets.unknown.size(); ++i) {
      CHECK(sets.unknown[i].index == expect.unknown[i].first);
      CHECK((sets.unknown[i].view == View::strong) == (expect.unknown[i].second == 1));
    }

    // disjointness and weak-sibling guarantee
    for (const auto& ke : sets.known) {
      for (const auto& ue : sets.unknown) {
        CHECK_FALSE((ke.index == ue.index && ke.view == ue.view));
      }
    }
    for (const auto& e : sets.known) {
      if (e.view == View::strong) {
        bool has_weak = false;
        for (const auto& other : sets.known) {
          if (other.index == e.index && other.view == View::weak) has_weak = true;
        }
        CHECK(has_weak);
      }
    }
  }
}
