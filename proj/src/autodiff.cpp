#include "cpr/autodiff.hpp"

#include <cmath>

#include "cpr/kernels.hpp"

namespace cpr {

Tape::VarId Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<VarId>(nodes_.size()) - 1;
}

void Tape::check_id(VarId id) const {
  if (nodes_.empty()) throw StateError("tape op before any forward computation");
  if (id < 0 || id >= static_cast<VarId>(nodes_.size())) throw StateError("invalid tape var id");
}

const Tape::Node& Tape::node(VarId id) const {
  check_id(id);
  return nodes_[id];
}

Tape::Node& Tape::mutable_node(VarId id) {
  check_id(id);
  return nodes_[id];
}

const Tensor& Tape::value(VarId id) const { return node(id).value; }

double Tape::scalar(VarId id) const {
  const Tensor& v = value(id);
  if (v.size() != 1) throw StateError("scalar() on non-scalar var " + v.shape_str());
  return v[0];
}

Tape::VarId Tape::input(Tensor value) {
  Node n;
  n.op = Op::input;
  n.value = std::move(value);
  return push(std::move(n));
}

Tape::VarId Tape::param(Param& p) {
  Node n;
  n.op = Op::param;
  n.value = p.value;
  n.param_ref = &p;
  return push(std::move(n));
}

Tape::VarId Tape::linear(VarId x, VarId w, VarId b) {
  const Tensor& xv = node(x).value;
  const Tensor& wv = node(w).value;
  const Tensor& bv = node(b).value;
  if (xv.cols() != wv.cols() || wv.rows() != static_cast<int>(bv.size())) {
    throw ConfigError("linear: shape mismatch x" + xv.shape_str() + " w" + wv.shape_str() +
                      " b" + bv.shape_str());
  }
  Node n;
  n.op = Op::linear;
  n.a = x;
  n.b = w;
  n.c = b;
  n.value = Tensor({xv.rows(), wv.rows()});
  kernels::add_row_vector(n.value.data(), bv.data(), xv.rows(), wv.rows());
  kernels::matmul_nt(xv.data(), wv.data(), n.value.data(), xv.rows(), xv.cols(), wv.rows());
  return push(std::move(n));
}

Tape::VarId Tape::matmul_nt(VarId x, VarId m) {
  const Tensor& xv = node(x).value;
  const Tensor& mv = node(m).value;
  if (xv.cols() != mv.cols()) {
    throw ConfigError("matmul_nt: shape mismatch " + xv.shape_str() + " vs " + mv.shape_str());
  }
  Node n;
  n.op = Op::matmul_nt;
  n.a = x;
  n.b = m;
  n.value = Tensor({xv.rows(), mv.rows()});
  kernels::matmul_nt(xv.data(), mv.data(), n.value.data(), xv.rows(), xv.cols(), mv.rows());
  return push(std::move(n));
}

Tape::VarId Tape::relu(VarId x) {
  const Tensor& xv = node(x).value;
  Node n;
  n.op = Op::relu;
  n.a = x;
  n.value = Tensor(xv.shape());
  kernels::relu(xv.data(), n.value.data(), xv.size());
  return push(std::move(n));
}

Tape::VarId Tape::concat_cols(VarId a, VarId b) {
  const Tensor& av = node(a).value;
  const Tensor& bv = node(b).value;
  if (av.rows() != bv.rows()) {
    throw ConfigError("concat_cols: row mismatch " + av.shape_str() + " vs " + bv.shape_str());
  }
  Node n;
  n.op = Op::concat_cols;
  n.a = a;
  n.b = b;
  n.value = Tensor({av.rows(), av.cols() + bv.cols()});
  for (int r = 0; r < av.rows(); ++r) {
    double* out = n.value.row_ptr(r);
    const double* ar = av.row_ptr(r);
    const double* br = bv.row_ptr(r);
    for (int j = 0; j < av.cols(); ++j) out[j] = ar[j];
    for (int j = 0; j < bv.cols(); ++j) out[av.cols() + j] = br[j];
  }
  return push(std::move(n));
}

Tape::VarId Tape::log_softmax_rows(VarId x) {
  const Tensor& xv = node(x).value;
  Node n;
  n.op = Op::log_softmax;
  n.a = x;
  n.value = Tensor(xv.shape());
  kernels::row_log_softmax(xv.data(), n.value.data(), xv.rows(), xv.cols());
  return push(std::move(n));
}

Tape::VarId Tape::softmax_rows(VarId x) {
  const Tensor& xv = node(x).value;
  Node n;
  n.op = Op::softmax;
  n.a = x;
  n.value = Tensor(xv.shape());
  kernels::row_softmax(xv.data(), n.value.data(), xv.rows(), xv.cols());
  return push(std::move(n));
}

Tape::VarId Tape::exp(VarId x) {
  const Tensor& xv = node(x).value;
  Node n;
  n.op = Op::exp;
  n.a = x;
  n.value = Tensor(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) n.value[i] = std::exp(xv[i]);
  return push(std::move(n));
}

Tape::VarId Tape::mul(VarId a, VarId b) {
  const Tensor& av = node(a).value;
  const Tensor& bv = node(b).value;
  if (!av.same_shape(bv)) {
    throw ConfigError("mul: shape mismatch " + av.shape_str() + " vs " + bv.shape_str());
  }
  Node n;
  n.op = Op::mul;
  n.a = a;
  n.b = b;
  n.value = Tensor(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) n.value[i] = av[i] * bv[i];
  return push(std::move(n));
}

Tape::VarId Tape::mul_const(VarId x, Tensor c) {
  const Tensor& xv = node(x).value;
  if (!xv.same_shape(c)) {
    throw ConfigError("mul_const: shape mismatch " + xv.shape_str() + " vs " + c.shape_str());
  }
  Node n;
  n.op = Op::mul_const;
  n.a = x;
  n.constant = std::move(c);
  n.value = Tensor(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) n.value[i] = xv[i] * n.constant[i];
  return push(std::move(n));
}

Tape::VarId Tape::add(VarId a, VarId b) {
  const Tensor& av = node(a).value;
  const Tensor& bv = node(b).value;
  if (!av.same_shape(bv)) {
    throw ConfigError("add: shape mismatch " + av.shape_str() + " vs " + bv.shape_str());
  }
  Node n;
  n.op = Op::add;
  n.a = a;
  n.b = b;
  n.value = Tensor(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) n.value[i] = av[i] + bv[i];
  return push(std::move(n));
}

Tape::VarId Tape::add_const(VarId x, Tensor c) {
  const Tensor& xv = node(x).value;
  if (!xv.same_shape(c)) {
    throw ConfigError("add_const: shape mismatch " + xv.shape_str() + " vs " + c.shape_str());
  }
  Node n;
  n.op = Op::add_const;
  n.a = x;
  n.constant = std::move(c);
  n.value = Tensor(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) n.value[i] = xv[i] + n.constant[i];
  return push(std::move(n));
}

Tape::VarId Tape::sub(VarId a, VarId b) {
  const Tensor& av = node(a).value;
  const Tensor& bv = node(b).value;
  if (!av.same_shape(bv)) {
    throw ConfigError("sub: shape mismatch " + av.shape_str() + " vs " + bv.shape_str());
  }
  Node n;
  n.op = Op::sub;
  n.a = a;
  n.b = b;
  n.value = Tensor(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) n.value[i] = av[i] - bv[i];
  return push(std::move(n));
}

Tape::VarId Tape::scale(VarId x, double c) {
  const Tensor& xv = node(x).value;
  Node n;
  n.op = Op::scale;
  n.a = x;
  n.coef = c;
  n.value = Tensor(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) n.value[i] = c * xv[i];
  return push(std::move(n));
}

Tape::VarId Tape::pick_per_row(VarId x, std::vector<int> idx) {
  const Tensor& xv = node(x).value;
  if (static_cast<int>(idx.size()) != xv.rows()) {
    throw ConfigError("pick_per_row: index count does not match rows");
  }
  for (int r = 0; r < xv.rows(); ++r) {
    if (idx[r] < 0 || idx[r] >= xv.cols()) throw ConfigError("pick_per_row: index out of range");
  }
  Node n;
  n.op = Op::pick;
  n.a = x;
  n.indices = std::move(idx);
  n.value = Tensor({xv.rows(), 1});
  for (int r = 0; r < xv.rows(); ++r) n.value[r] = xv.at(r, n.indices[r]);
  return push(std::move(n));
}

Tape::VarId Tape::row_min(VarId x) {
  const Tensor& xv = node(x).value;
  Node n;
  n.op = Op::row_min;
  n.a = x;
  n.indices.resize(xv.rows());
  n.value = Tensor({xv.rows(), 1});
  for (int r = 0; r < xv.rows(); ++r) {
    const int j = argmin(xv.row_ptr(r), xv.cols());
    n.indices[r] = j;
    n.value[r] = xv.at(r, j);
  }
  return push(std::move(n));
}

Tape::VarId Tape::row_sum(VarId x) {
  const Tensor& xv = node(x).value;
  Node n;
  n.op = Op::row_sum;
  n.a = x;
  n.value = Tensor({xv.rows(), 1});
  for (int r = 0; r < xv.rows(); ++r) {
    double acc = 0.0;
    const double* xr = xv.row_ptr(r);
    for (int j = 0; j < xv.cols(); ++j) acc += xr[j];
    n.value[r] = acc;
  }
  return push(std::move(n));
}

Tape::VarId Tape::gather_rows(VarId x, std::vector<int> rows) {
  const Tensor& xv = node(x).value;
  if (rows.empty()) throw ConfigError("gather_rows: empty row list");
  for (int r : rows) {
    if (r < 0 || r >= xv.rows()) throw ConfigError("gather_rows: row index out of range");
  }
  Node n;
  n.op = Op::gather_rows;
  n.a = x;
  n.indices = std::move(rows);
  n.value = Tensor({static_cast<int>(n.indices.size()), xv.cols()});
  for (std::size_t i = 0; i < n.indices.size(); ++i) {
    const double* src = xv.row_ptr(n.indices[i]);
    double* dst = n.value.row_ptr(static_cast<int>(i));
    for (int j = 0; j < xv.cols(); ++j) dst[j] = src[j];
  }
  return push(std::move(n));
}

Tape::VarId Tape::sub_scalar(VarId x, VarId s) {
  const Tensor& xv = node(x).value;
  const Tensor& sv = node(s).value;
  if (sv.size() != 1) throw ConfigError("sub_scalar: s must be a scalar node");
  Node n;
  n.op = Op::sub_scalar;
  n.a = x;
  n.b = s;
  n.value = Tensor(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) n.value[i] = xv[i] - sv[0];
  return push(std::move(n));
}

Tape::VarId Tape::sum_all(VarId x) {
  const Tensor& xv = node(x).value;
  Node n;
  n.op = Op::sum_all;
  n.a = x;
  double acc = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) acc += xv[i];
  n.value = Tensor::scalar(acc);
  return push(std::move(n));
}

Tape::VarId Tape::mean_all(VarId x) {
  const Tensor& xv = node(x).value;
  Node n;
  n.op = Op::mean_all;
  n.a = x;
  double acc = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) acc += xv[i];
  n.value = Tensor::scalar(acc / static_cast<double>(xv.size()));
  return push(std::move(n));
}

void Tape::backward(VarId loss) {
  if (nodes_.empty()) throw StateError("backward() called before any forward pass");
  check_id(loss);
  if (nodes_[loss].value.size() != 1) {
    throw StateError("backward() requires a scalar loss, got " +
                     nodes_[loss].value.shape_str());
  }
  for (Node& n : nodes_) {
    n.grad = Tensor(n.value.shape());
  }
  nodes_[loss].grad[0] = 1.0;
  for (VarId id = loss; id >= 0; --id) {
    backward_node(nodes_[id]);
  }
}

void Tape::backward_node(Node& n) {
  const Tensor& g = n.grad;
  switch (n.op) {
    case Op::input:
      break;
    case Op::param:
      for (std::size_t i = 0; i < g.size(); ++i) n.param_ref->grad[i] += g[i];
      break;
    case Op::linear: {
      Node& x = nodes_[n.a];
      Node& w = nodes_[n.b];
      Node& b = nodes_[n.c];
      // dx += g . w ; dw += g^T . x ; db += col sums of g
      kernels::matmul_nn(g.data(), w.value.data(), x.grad.data(), g.rows(), g.cols(),
                         w.value.cols());
      kernels::matmul_tn(g.data(), x.value.data(), w.grad.data(), g.rows(), g.cols(),
                         x.value.cols());
      kernels::col_sums_acc(g.data(), b.grad.data(), g.rows(), g.cols());
      break;
    }
    case Op::matmul_nt: {
      Node& x = nodes_[n.a];
      Node& m = nodes_[n.b];
      kernels::matmul_nn(g.data(), m.value.data(), x.grad.data(), g.rows(), g.cols(),
                         m.value.cols());
      kernels::matmul_tn(g.data(), x.value.data(), m.grad.data(), g.rows(), g.cols(),
                         x.value.cols());
      break;
    }
    case Op::relu: {
      Node& x = nodes_[n.a];
      kernels::relu_backward_acc(x.value.data(), g.data(), x.grad.data(), g.size());
      break;
    }
    case Op::concat_cols: {
      Node& a = nodes_[n.a];
      Node& b = nodes_[n.b];
      for (int r = 0; r < g.rows(); ++r) {
        const double* gr = g.row_ptr(r);
        double* ga = a.grad.row_ptr(r);
        double* gb = b.grad.row_ptr(r);
        for (int j = 0; j < a.value.cols(); ++j) ga[j] += gr[j];
        for (int j = 0; j < b.value.cols(); ++j) gb[j] += gr[a.value.cols() + j];
      }
      break;
    }
    case Op::log_softmax: {
      Node& x = nodes_[n.a];
      for (int r = 0; r < g.rows(); ++r) {
        const double* gr = g.row_ptr(r);
        const double* ls = n.value.row_ptr(r);
        double* gx = x.grad.row_ptr(r);
        double gsum = 0.0;
        for (int j = 0; j < g.cols(); ++j) gsum += gr[j];
        for (int j = 0; j < g.cols(); ++j) gx[j] += gr[j] - std::exp(ls[j]) * gsum;
      }
      break;
    }
    case Op::softmax: {
      Node& x = nodes_[n.a];
      for (int r = 0; r < g.rows(); ++r) {
        const double* gr = g.row_ptr(r);
        const double* p = n.value.row_ptr(r);
        double* gx = x.grad.row_ptr(r);
        double dot = 0.0;
        for (int j = 0; j < g.cols(); ++j) dot += gr[j] * p[j];
        for (int j = 0; j < g.cols(); ++j) gx[j] += p[j] * (gr[j] - dot);
      }
      break;
    }
    case Op::exp: {
      Node& x = nodes_[n.a];
      for (std::size_t i = 0; i < g.size(); ++i) x.grad[i] += g[i] * n.value[i];
      break;
    }
    case Op::mul: {
      Node& a = nodes_[n.a];
      Node& b = nodes_[n.b];
      for (std::size_t i = 0; i < g.size(); ++i) {
        a.grad[i] += g[i] * b.value[i];
        b.grad[i] += g[i] * a.value[i];
      }
      break;
    }
    case Op::mul_const: {
      Node& x = nodes_[n.a];
      for (std::size_t i = 0; i < g.size(); ++i) x.grad[i] += g[i] * n.constant[i];
      break;
    }
    case Op::add: {
      Node& a = nodes_[n.a];
      Node& b = nodes_[n.b];
      for (std::size_t i = 0; i < g.size(); ++i) {
        a.grad[i] += g[i];
        b.grad[i] += g[i];
      }
      break;
    }
    case Op::add_const: {
      Node& x = nodes_[n.a];
      for (std::size_t i = 0; i < g.size(); ++i) x.grad[i] += g[i];
      break;
    }
    case Op::sub: {
      Node& a = nodes_[n.a];
      Node& b = nodes_[n.b];
      for (std::size_t i = 0; i < g.size(); ++i) {
        a.grad[i] += g[i];
        b.grad[i] -= g[i];
      }
      break;
    }
    case Op::scale: {
      Node& x = nodes_[n.a];
      for (std::size_t i = 0; i < g.size(); ++i) x.grad[i] += n.coef * g[i];
      break;
    }
    case Op::pick: {
      Node& x = nodes_[n.a];
      for (int r = 0; r < x.value.rows(); ++r) x.grad.at(r, n.indices[r]) += g[r];
      break;
    }
    case Op::row_min: {
      Node& x = nodes_[n.a];
      for (int r = 0; r < x.value.rows(); ++r) x.grad.at(r, n.indices[r]) += g[r];
      break;
    }
    case Op::row_sum: {
      Node& x = nodes_[n.a];
      for (int r = 0; r < x.value.rows(); ++r) {
        double* gx = x.grad.row_ptr(r);
        for (int j = 0; j < x.value.cols(); ++j) gx[j] += g[r];
      }
      break;
    }
    case Op::gather_rows: {
      Node& x = nodes_[n.a];
      for (std::size_t i = 0; i < n.indices.size(); ++i) {
        const double* gr = g.row_ptr(static_cast<int>(i));
        double* gx = x.grad.row_ptr(n.indices[i]);
        for (int j = 0; j < x.value.cols(); ++j) gx[j] += gr[j];
      }
      break;
    }
    case Op::sub_scalar: {
      Node& x = nodes_[n.a];
      Node& s = nodes_[n.b];
      double total = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        x.grad[i] += g[i];
        total += g[i];
      }
      s.grad[0] -= total;
      break;
    }
    case Op::sum_all: {
      Node& x = nodes_[n.a];
      for (std::size_t i = 0; i < x.value.size(); ++i) x.grad[i] += g[0];
      break;
    }
    case Op::mean_all: {
      Node& x = nodes_[n.a];
      const double inv = 1.0 / static_cast<double>(x.value.size());
      for (std::size_t i = 0; i < x.value.size(); ++i) x.grad[i] += g[0] * inv;
      break;
    }
  }
}

}  // namespace cpr
