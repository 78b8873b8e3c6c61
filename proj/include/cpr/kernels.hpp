#pragma once

#include <cstddef>

#include "cpr/tensor.hpp"

namespace cpr::kernels {

enum class Backend { serial, openmp };

Backend active_backend();
void set_backend(Backend b);
bool openmp_compiled();
int max_threads();

// All matmul kernels accumulate into c; callers zero or pre-fill c.
// Each output element is reduced serially in k order, so the OpenMP
// backend (parallel over output rows) is bit-identical to the serial one.

// c(m x n) += a(m x k) . b(n x k)^T
void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n);
// c(m x n) += a(m x k) . b(k x n)
void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n);
// c(n x k) += a(m x n)^T . b(m x k)
void matmul_tn(const double* a, const double* b, double* c, int m, int n, int k);

void relu(const double* x, double* y, std::size_t n);
// dx += dy where x > 0
void relu_backward_acc(const double* x, const double* dy, double* dx, std::size_t n);
// y[r, :] += v for every row r
void add_row_vector(double* y, const double* v, int rows, int cols);
// out[j] += sum_r a[r, j]
void col_sums_acc(const double* a, double* out, int rows, int cols);

// Row-wise softmax / log-softmax with max subtraction.
void row_softmax(const double* x, double* p, int rows, int cols);
void row_log_softmax(const double* x, double* out, int rows, int cols);

// Serial reference implementations, kept as the comparison baseline for the
// parallel backend (tests assert bit equality, the bench target times both).
namespace serial {
void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n);
void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n);
void matmul_tn(const double* a, const double* b, double* c, int m, int n, int k);
void relu(const double* x, double* y, std::size_t n);
void relu_backward_acc(const double* x, const double* dy, double* dx, std::size_t n);
void add_row_vector(double* y, const double* v, int rows, int cols);
void col_sums_acc(const double* a, double* out, int rows, int cols);
void row_softmax(const double* x, double* p, int rows, int cols);
void row_log_softmax(const double* x, double* out, int rows, int cols);
}  // namespace serial

}  // namespace cpr::kernels

namespace cpr {

// Tensor-level wrappers used by inference paths and tests.
Tensor softmax(const Tensor& logits);
Tensor log_softmax(const Tensor& logits);

}  // namespace cpr
