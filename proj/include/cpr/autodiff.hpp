#pragma once

#include <vector>

#include "cpr/tensor.hpp"

namespace cpr {

// A learnable tensor plus its accumulated gradient. Gradients are zero after
// an optimizer step and accumulate across backward() calls in between.
struct Param {
  Tensor value;
  Tensor grad;

  explicit Param(Tensor v) : value(std::move(v)), grad(value.shape()) {}
  void zero_grad() { grad.fill(0.0); }
};

// Reverse-mode tape over matrices. One tape per training step: ops append
// nodes, backward() sweeps them in reverse and accumulates into Param::grad.
// The op set is exactly what the losses here need, nothing more.
class Tape {
 public:
  using VarId = int;

  VarId input(Tensor value);
  VarId param(Param& p);

  // x(n x k) . w(o x k)^T + b(o)
  VarId linear(VarId x, VarId w, VarId b);
  // x(n x d) . m(r x d)^T
  VarId matmul_nt(VarId x, VarId m);
  VarId relu(VarId x);
  VarId concat_cols(VarId a, VarId b);
  VarId log_softmax_rows(VarId x);
  VarId softmax_rows(VarId x);
  VarId exp(VarId x);
  VarId mul(VarId a, VarId b);
  VarId mul_const(VarId x, Tensor c);
  VarId add(VarId a, VarId b);
  VarId add_const(VarId x, Tensor c);
  VarId sub(VarId a, VarId b);
  VarId scale(VarId x, double c);
  // out(n x 1), out[r] = x[r, idx[r]]
  VarId pick_per_row(VarId x, std::vector<int> idx);
  // out(n x 1), row minimum; subgradient goes to the lowest-index argmin
  VarId row_min(VarId x);
  VarId row_sum(VarId x);
  VarId gather_rows(VarId x, std::vector<int> rows);
  // x - s broadcast, s a scalar node
  VarId sub_scalar(VarId x, VarId s);
  VarId sum_all(VarId x);
  VarId mean_all(VarId x);

  const Tensor& value(VarId id) const;
  double scalar(VarId id) const;
  std::size_t node_count() const { return nodes_.size(); }

  // Seeds d(loss)/d(loss) = 1 and accumulates into every reachable Param.
  void backward(VarId loss);

 private:
  enum class Op {
    input,
    param,
    linear,
    matmul_nt,
    relu,
    concat_cols,
    log_softmax,
    softmax,
    exp,
    mul,
    mul_const,
    add,
    add_const,
    sub,
    scale,
    pick,
    row_min,
    row_sum,
    gather_rows,
    sub_scalar,
    sum_all,
    mean_all,
  };

  struct Node {
    Op op;
    Tensor value;
    Tensor grad;
    int a = -1, b = -1, c = -1;
    Param* param_ref = nullptr;
    std::vector<int> indices;
    Tensor constant;
    double coef = 0.0;
  };

  VarId push(Node n);
  const Node& node(VarId id) const;
  Node& mutable_node(VarId id);
  void check_id(VarId id) const;
  void backward_node(Node& n);

  std::vector<Node> nodes_;
};

}  // namespace cpr
