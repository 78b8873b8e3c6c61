#pragma once

#include <functional>
#include <vector>

#include "cpr/autodiff.hpp"

namespace cpr {

// Central-difference gradients of f with respect to every coordinate of the
// given params. f is re-evaluated with temporarily perturbed values; the
// originals are restored afterwards.
std::vector<Tensor> central_difference_grads(const std::function<double()>& f,
                                             const std::vector<Param*>& params, double eps);

// Max over coordinates of |analytic - central difference| / max(1, |analytic|).
// eps must lie in [1e-7, 1e-3].
double grad_check(const std::function<double()>& f, const std::vector<Param*>& params,
                  const std::vector<Tensor>& analytic_grads, double eps);

}  // namespace cpr
