#include "cpr/kernels.hpp"

#include <atomic>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cpr::kernels {

namespace {

std::atomic<Backend> g_backend{
#ifdef _OPENMP
    Backend::openmp
#else
    Backend::serial
#endif
};

}  // namespace

Backend active_backend() { return g_backend.load(); }

void set_backend(Backend b) {
  if (b == Backend::openmp && !openmp_compiled()) b = Backend::serial;
  g_backend.store(b);
}

bool openmp_compiled() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace serial {

void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<std::size_t>(i) * k;
    double* ci = c + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* bj = b + static_cast<std::size_t>(j) * k;
      double acc = 0.0;
      for (int t = 0; t < k; ++t) acc += ai[t] * bj[t];
      ci[j] += acc;
    }
  }
}

void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<std::size_t>(i) * k;
    double* ci = c + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int t = 0; t < k; ++t) acc += ai[t] * b[static_cast<std::size_t>(t) * n + j];
      ci[j] += acc;
    }
  }
}

void matmul_tn(const double* a, const double* b, double* c, int m, int n, int k) {
  for (int i = 0; i < n; ++i) {
    double* ci = c + static_cast<std::size_t>(i) * k;
    for (int j = 0; j < k; ++j) {
      double acc = 0.0;
      for (int t = 0; t < m; ++t) {
        acc += a[static_cast<std::size_t>(t) * n + i] * b[static_cast<std::size_t>(t) * k + j];
      }
      ci[j] += acc;
    }
  }
}

void relu(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward_acc(const double* x, const double* dy, double* dx, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] > 0.0) dx[i] += dy[i];
  }
}

void add_row_vector(double* y, const double* v, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    double* yr = y + static_cast<std::size_t>(r) * cols;
    for (int j = 0; j < cols; ++j) yr[j] += v[j];
  }
}

void col_sums_acc(const double* a, double* out, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const double* ar = a + static_cast<std::size_t>(r) * cols;
    for (int j = 0; j < cols; ++j) out[j] += ar[j];
  }
}

namespace {

inline void softmax_row(const double* x, double* p, int cols) {
  double mx = x[0];
  for (int j = 1; j < cols; ++j) mx = std::max(mx, x[j]);
  double z = 0.0;
  for (int j = 0; j < cols; ++j) {
    p[j] = std::exp(x[j] - mx);
    z += p[j];
  }
  const double inv = 1.0 / z;
  for (int j = 0; j < cols; ++j) p[j] *= inv;
}

inline void log_softmax_row(const double* x, double* out, int cols) {
  double mx = x[0];
  for (int j = 1; j < cols; ++j) mx = std::max(mx, x[j]);
  double z = 0.0;
  for (int j = 0; j < cols; ++j) z += std::exp(x[j] - mx);
  const double lse = mx + std::log(z);
  for (int j = 0; j < cols; ++j) out[j] = x[j] - lse;
}

}  // namespace

void row_softmax(const double* x, double* p, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    softmax_row(x + static_cast<std::size_t>(r) * cols, p + static_cast<std::size_t>(r) * cols,
                cols);
  }
}

void row_log_softmax(const double* x, double* out, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    log_softmax_row(x + static_cast<std::size_t>(r) * cols,
                    out + static_cast<std::size_t>(r) * cols, cols);
  }
}

}  // namespace serial

namespace omp {

void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<std::size_t>(i) * k;
    double* ci = c + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* bj = b + static_cast<std::size_t>(j) * k;
      double acc = 0.0;
      for (int t = 0; t < k; ++t) acc += ai[t] * bj[t];
      ci[j] += acc;
    }
  }
}

void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<std::size_t>(i) * k;
    double* ci = c + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int t = 0; t < k; ++t) acc += ai[t] * b[static_cast<std::size_t>(t) * n + j];
      ci[j] += acc;
    }
  }
}

void matmul_tn(const double* a, const double* b, double* c, int m, int n, int k) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double* ci = c + static_cast<std::size_t>(i) * k;
    for (int j = 0; j < k; ++j) {
      double acc = 0.0;
      for (int t = 0; t < m; ++t) {
        acc += a[static_cast<std::size_t>(t) * n + i] * b[static_cast<std::size_t>(t) * k + j];
      }
      ci[j] += acc;
    }
  }
}

void relu(const double* x, double* y, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    y[i] = x[i] > 0.0 ? x[i] : 0.0;
  }
}

void relu_backward_acc(const double* x, const double* dy, double* dx, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    if (x[i] > 0.0) dx[i] += dy[i];
  }
}

void row_softmax(const double* x, double* p, int rows, int cols) {
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    serial::row_softmax(x + static_cast<std::size_t>(r) * cols,
                        p + static_cast<std::size_t>(r) * cols, 1, cols);
  }
}

void row_log_softmax(const double* x, double* out, int rows, int cols) {
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    serial::row_log_softmax(x + static_cast<std::size_t>(r) * cols,
                            out + static_cast<std::size_t>(r) * cols, 1, cols);
  }
}

}  // namespace omp

void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n) {
  if (active_backend() == Backend::openmp) {
    omp::matmul_nt(a, b, c, m, k, n);
  } else {
    serial::matmul_nt(a, b, c, m, k, n);
  }
}

void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n) {
  if (active_backend() == Backend::openmp) {
    omp::matmul_nn(a, b, c, m, k, n);
  } else {
    serial::matmul_nn(a, b, c, m, k, n);
  }
}

void matmul_tn(const double* a, const double* b, double* c, int m, int n, int k) {
  if (active_backend() == Backend::openmp) {
    omp::matmul_tn(a, b, c, m, n, k);
  } else {
    serial::matmul_tn(a, b, c, m, n, k);
  }
}

void relu(const double* x, double* y, std::size_t n) {
  if (active_backend() == Backend::openmp) {
    omp::relu(x, y, n);
  } else {
    serial::relu(x, y, n);
  }
}

void relu_backward_acc(const double* x, const double* dy, double* dx, std::size_t n) {
  if (active_backend() == Backend::openmp) {
    omp::relu_backward_acc(x, dy, dx, n);
  } else {
    serial::relu_backward_acc(x, dy, dx, n);
  }
}

void add_row_vector(double* y, const double* v, int rows, int cols) {
  serial::add_row_vector(y, v, rows, cols);
}

void col_sums_acc(const double* a, double* out, int rows, int cols) {
  serial::col_sums_acc(a, out, rows, cols);
}

void row_softmax(const double* x, double* p, int rows, int cols) {
  if (active_backend() == Backend::openmp) {
    omp::row_softmax(x, p, rows, cols);
  } else {
    serial::row_softmax(x, p, rows, cols);
  }
}

void row_log_softmax(const double* x, double* out, int rows, int cols) {
  if (active_backend() == Backend::openmp) {
    omp::row_log_softmax(x, out, rows, cols);
  } else {
    serial::row_log_softmax(x, out, rows, cols);
  }
}

}  // namespace cpr::kernels

namespace cpr {

Tensor softmax(const Tensor& logits) {
  if (!logits.all_finite()) throw ConfigError("softmax requires finite logits");
  Tensor p(logits.shape());
  kernels::row_softmax(logits.data(), p.data(), logits.rows(), logits.cols());
  return p;
}

Tensor log_softmax(const Tensor& logits) {
  if (!logits.all_finite()) throw ConfigError("log_softmax requires finite logits");
  Tensor out(logits.shape());
  kernels::row_log_softmax(logits.data(), out.data(), logits.rows(), logits.cols());
  return out;
}

}  // namespace cpr
