#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace cpr {

// Deterministic random source. Distributions are implemented by hand (no
// std::*_distribution) so that a saved engine state reproduces the exact
// draw sequence after a checkpoint restore.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1)
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  // [0, n)
  int uniform_int(int n);

  // Standard normal via Box-Muller, cache-free: two u64 draws per sample.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      std::swap(v[i], v[uniform_int(i + 1)]);
    }
  }

  std::string save_state() const;
  void load_state(const std::string& state);

 private:
  std::mt19937_64 engine_;
};

}  // namespace cpr
