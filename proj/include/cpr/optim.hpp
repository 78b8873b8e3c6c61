#pragma once

#include <vector>

#include "cpr/autodiff.hpp"

namespace cpr {

struct SgdConfig {
  double learning_rate = 0.0016;
  double momentum = 0.9;
  double weight_decay = 5e-4;
};

// SGD with momentum and weight decay:
//   v <- momentum * v + (grad + weight_decay * value)
//   value <- value - learning_rate * v
// Gradients are zeroed after each step. decay_override / lr_scale, when
// non-empty, supply per-param weight decay and learning-rate multipliers.
class SgdOptimizer {
 public:
  SgdOptimizer(SgdConfig cfg, std::vector<Param*> params,
               std::vector<double> decay_override = {}, std::vector<double> lr_scale = {});

  void step();
  long steps() const { return steps_; }
  const SgdConfig& config() const { return cfg_; }
  std::vector<Tensor>& velocities() { return velocity_; }

 private:
  SgdConfig cfg_;
  std::vector<Param*> params_;
  std::vector<double> decay_;
  std::vector<double> lr_scale_;
  std::vector<Tensor> velocity_;
  long steps_ = 0;
};

}  // namespace cpr
