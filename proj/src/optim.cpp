#include "cpr/optim.hpp"

#include "cpr/error.hpp"

namespace cpr {

SgdOptimizer::SgdOptimizer(SgdConfig cfg, std::vector<Param*> params,
                           std::vector<double> decay_override, std::vector<double> lr_scale)
    : cfg_(cfg),
      params_(std::move(params)),
      decay_(std::move(decay_override)),
      lr_scale_(std::move(lr_scale)) {
  if (cfg_.learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
  if (cfg_.momentum < 0.0 || cfg_.momentum >= 1.0) throw ConfigError("momentum must be in [0,1)");
  if (cfg_.weight_decay < 0.0) throw ConfigError("weight_decay must be non-negative");
  if (decay_.empty()) {
    decay_.assign(params_.size(), cfg_.weight_decay);
  } else if (decay_.size() != params_.size()) {
    throw ConfigError("weight decay override must align with params");
  }
  for (double d : decay_) {
    if (d < 0.0) throw ConfigError("weight_decay must be non-negative");
  }
  if (lr_scale_.empty()) {
    lr_scale_.assign(params_.size(), 1.0);
  } else if (lr_scale_.size() != params_.size()) {
    throw ConfigError("lr scale override must align with params");
  }
  for (double s : lr_scale_) {
    if (s <= 0.0) throw ConfigError("lr scale must be positive");
  }
  velocity_.reserve(params_.size());
  for (Param* p : params_) velocity_.emplace_back(p->value.shape());
}

void SgdOptimizer::step() {
  for (std::size_t pi = 0; pi < params_.size(); ++pi) {
    Param& p = *params_[pi];
    Tensor& v = velocity_[pi];
    const double wd = decay_[pi];
    const double lr = cfg_.learning_rate * lr_scale_[pi];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i] + wd * p.value[i];
      v[i] = cfg_.momentum * v[i] + g;
      p.value[i] -= lr * v[i];
    }
    p.zero_grad();
  }
  ++steps_;
}

}  // namespace cpr
