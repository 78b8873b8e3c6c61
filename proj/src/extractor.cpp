#include "cpr/extractor.hpp"

#include <cmath>

#include "cpr/kernels.hpp"

namespace cpr {

FeatureExtractor FeatureExtractor::mlp(int input_dim, const std::vector<int>& hidden_dims,
                                       int output_dim, Rng& rng) {
  if (input_dim < 1 || output_dim < 1) throw ConfigError("mlp: dimensions must be positive");
  FeatureExtractor net;
  int in = input_dim;
  std::vector<int> dims = hidden_dims;
  dims.push_back(output_dim);
  for (std::size_t li = 0; li < dims.size(); ++li) {
    const int out = dims[li];
    if (out < 1) throw ConfigError("mlp: dimensions must be positive");
    const double std_dev = std::sqrt(2.0 / static_cast<double>(in));
    Tensor w({out, in});
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.normal(0.0, std_dev);
    Tensor b({out});
    const Activation act = li + 1 < dims.size() ? Activation::relu : Activation::none;
    net.add_layer(std::move(w), std::move(b), act);
    in = out;
  }
  return net;
}

void FeatureExtractor::add_layer(Tensor weight, Tensor bias, Activation activation) {
  if (weight.ndim() != 2 || bias.ndim() != 1 || weight.rows() != static_cast<int>(bias.size())) {
    throw ConfigError("add_layer: weight must be (out x in) with matching bias");
  }
  if (!layers_.empty() && weight.cols() != layers_.back().weight.value.rows()) {
    throw ConfigError("add_layer: layer input dim does not chain with previous output dim");
  }
  layers_.push_back(Layer{Param(std::move(weight)), Param(std::move(bias)), activation});
}

int FeatureExtractor::input_dim() const {
  if (layers_.empty()) throw ConfigError("extractor has no layers");
  return layers_.front().weight.value.cols();
}

int FeatureExtractor::output_dim() const {
  if (layers_.empty()) throw ConfigError("extractor has no layers");
  return layers_.back().weight.value.rows();
}

Tensor FeatureExtractor::forward(const Tensor& x) const {
  if (layers_.empty()) throw ConfigError("extractor has no layers");
  if (x.cols() != input_dim()) {
    throw ConfigError("forward: input has " + std::to_string(x.cols()) + " columns, expected " +
                      std::to_string(input_dim()));
  }
  if (!x.all_finite()) throw ConfigError("forward: input contains non-finite values");
  Tensor cur = x.ndim() == 1 ? Tensor({1, x.cols()}, {x.data(), x.data() + x.size()}) : x;
  for (const Layer& layer : layers_) {
    const Tensor& w = layer.weight.value;
    Tensor next({cur.rows(), w.rows()});
    kernels::add_row_vector(next.data(), layer.bias.value.data(), cur.rows(), w.rows());
    kernels::matmul_nt(cur.data(), w.data(), next.data(), cur.rows(), cur.cols(), w.rows());
    if (layer.activation == Activation::relu) {
      kernels::relu(next.data(), next.data(), next.size());
    }
    cur = std::move(next);
  }
  return cur;
}

Tape::VarId FeatureExtractor::forward(Tape& tape, Tape::VarId x) {
  if (layers_.empty()) throw ConfigError("extractor has no layers");
  Tape::VarId cur = x;
  for (Layer& layer : layers_) {
    const Tape::VarId w = tape.param(layer.weight);
    const Tape::VarId b = tape.param(layer.bias);
    cur = tape.linear(cur, w, b);
    if (layer.activation == Activation::relu) cur = tape.relu(cur);
  }
  return cur;
}

std::vector<Param*> FeatureExtractor::parameters() {
  std::vector<Param*> out;
  for (Layer& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

}  // namespace cpr
