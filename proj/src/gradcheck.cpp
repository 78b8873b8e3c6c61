#include "cpr/gradcheck.hpp"

#include <cmath>

#include "cpr/error.hpp"

namespace cpr {

std::vector<Tensor> central_difference_grads(const std::function<double()>& f,
                                             const std::vector<Param*>& params, double eps) {
  if (eps < 1e-7 || eps > 1e-3) throw ConfigError("grad check eps must be in [1e-7, 1e-3]");
  std::vector<Tensor> grads;
  grads.reserve(params.size());
  for (Param* p : params) {
    Tensor g(p->value.shape());
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + eps;
      const double hi = f();
      p->value[i] = saved - eps;
      const double lo = f();
      p->value[i] = saved;
      g[i] = (hi - lo) / (2.0 * eps);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

double grad_check(const std::function<double()>& f, const std::vector<Param*>& params,
                  const std::vector<Tensor>& analytic_grads, double eps) {
  if (analytic_grads.size() != params.size()) {
    throw ConfigError("grad_check: analytic grad count does not match params");
  }
  const std::vector<Tensor> numeric = central_difference_grads(f, params, eps);
  double worst = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    const Tensor& a = analytic_grads[pi];
    const Tensor& n = numeric[pi];
    if (!a.same_shape(params[pi]->value)) {
      throw ConfigError("grad_check: analytic grad shape mismatch");
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double err = std::abs(a[i] - n[i]) / std::max(1.0, std::abs(a[i]));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace cpr
