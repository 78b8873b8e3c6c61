#pragma once

#include <vector>

#include "cpr/autodiff.hpp"
#include "cpr/rng.hpp"
#include "cpr/tensor.hpp"

namespace cpr {

enum class Activation { none, relu };

// Small feed-forward feature extractor: ordered affine layers with optional
// ReLU. Weights are (out x in), inputs are (batch x in).
class FeatureExtractor {
 public:
  struct Layer {
    Param weight;
    Param bias;
    Activation activation;
  };

  FeatureExtractor() = default;

  static FeatureExtractor mlp(int input_dim, const std::vector<int>& hidden_dims, int output_dim,
                              Rng& rng);

  void add_layer(Tensor weight, Tensor bias, Activation activation);

  int input_dim() const;
  int output_dim() const;
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  // Inference path; no intermediates are kept.
  Tensor forward(const Tensor& x) const;
  // Training path; the tape records intermediates for backward().
  Tape::VarId forward(Tape& tape, Tape::VarId x);

  std::vector<Param*> parameters();

 private:
  std::vector<Layer> layers_;
};

}  // namespace cpr
