#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cpr/kernels.hpp"
#include "cpr/rng.hpp"
#include "cpr/tensor.hpp"

#include "oracles.hpp"

using namespace cpr;

TEST_CASE("tensor shape and data validation") {
  Tensor t({2, 3});
  CHECK(t.size() == 6);
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  t.at(1, 2) = 4.5;
  CHECK(t[5] == 4.5);

  CHECK_THROWS_AS(Tensor({0, 3}), ConfigError);
  CHECK_THROWS_AS(Tensor({2, -1}), ConfigError);
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0}), ConfigError);

  Tensor v = Tensor::vec({1.0, 2.0, 3.0});
  CHECK(v.rows() == 1);
  CHECK(v.cols() == 3);
}

TEST_CASE("argmax and argmin break ties toward the lowest index") {
  Tensor v = Tensor::vec({1.0, 3.0, 3.0, 0.0});
  CHECK(argmax(v) == 1);
  Tensor w = Tensor::vec({2.0, 2.0, 2.0});
  CHECK(argmax(w) == 0);
  CHECK(argmin(w) == 0);
  Tensor u = Tensor::vec({5.0, -1.0, -1.0});
  CHECK(argmin(u) == 1);
}

TEST_CASE("all_finite flags NaN and infinity") {
  Tensor t = Tensor::vec({1.0, 2.0});
  CHECK(t.all_finite());
  t[1] = std::nan("");
  CHECK_FALSE(t.all_finite());
  t[1] = INFINITY;
  CHECK_FALSE(t.all_finite());
}

TEST_CASE("matmul kernels match a naive reference") {
  Rng rng(7);
  const int m = 5, k = 4, n = 3;
  Tensor a({m, k}), b({n, k});
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng.normal();
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = rng.normal();

  Tensor c({m, n});
  kernels::matmul_nt(a.data(), b.data(), c.data(), m, k, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double expect = 0.0;
      for (int t = 0; t < k; ++t) expect += a.at(i, t) * b.at(j, t);
      CHECK(c.at(i, j) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("openmp backend is bit-identical to the serial reference") {
  Rng rng(11);
  const int m = 17, k = 33, n = 9;
  Tensor a({m, k}), b({n, k}), bn({k, n});
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng.normal();
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = rng.normal();
  for (std::size_t i = 0; i < bn.size(); ++i) bn[i] = rng.normal();

  Tensor c_ser({m, n}), c_par({m, n});
  kernels::serial::matmul_nt(a.data(), b.data(), c_ser.data(), m, k, n);
  kernels::set_backend(kernels::Backend::openmp);
  kernels::matmul_nt(a.data(), b.data(), c_par.data(), m, k, n);
  CHECK(c_ser == c_par);

  Tensor d_ser({m, n}), d_par({m, n});
  kernels::serial::matmul_nn(a.data(), bn.data(), d_ser.data(), m, k, n);
  kernels::matmul_nn(a.data(), bn.data(), d_par.data(), m, k, n);
  CHECK(d_ser == d_par);

  // c(k x 5) += a(m x k)^T . g(m x 5)
  Tensor g({m, 5});
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = rng.normal();
  Tensor e_ser({k, 5}), e_par({k, 5});
  kernels::serial::matmul_tn(a.data(), g.data(), e_ser.data(), m, k, 5);
  kernels::matmul_tn(a.data(), g.data(), e_par.data(), m, k, 5);
  CHECK(e_ser == e_par);

  Tensor sm_ser({m, k}), sm_par({m, k});
  kernels::serial::row_softmax(a.data(), sm_ser.data(), m, k);
  kernels::row_softmax(a.data(), sm_par.data(), m, k);
  CHECK(sm_ser == sm_par);

  kernels::set_backend(kernels::Backend::serial);
  Tensor c_dispatch({m, n});
  kernels::matmul_nt(a.data(), b.data(), c_dispatch.data(), m, k, n);
  CHECK(c_dispatch == c_ser);
  kernels::set_backend(kernels::Backend::openmp);
}

TEST_CASE("softmax spec values") {
  CHECK(softmax(Tensor::vec({0.0, 0.0}))[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(softmax(Tensor::vec({0.0, 0.0}))[1] == doctest::Approx(0.5).epsilon(1e-12));

  const Tensor p = softmax(Tensor::vec({1.0, 0.0}));
  CHECK(p[0] == doctest::Approx(0.7311).epsilon(1e-4));
  CHECK(p[1] == doctest::Approx(0.2689).epsilon(1e-4));

  const Tensor q = softmax(Tensor::vec({1000.0, 0.0}));
  CHECK(q.all_finite());
  CHECK(std::abs(q[0] - 1.0) < 1e-12);
  CHECK(std::abs(q[1]) < 1e-12);
}

TEST_CASE("softmax rows sum to one and shift invariance holds") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int c = 2 + rng.uniform_int(9);
    Tensor z({1, c});
    for (int j = 0; j < c; ++j) z[j] = rng.uniform(-30.0, 30.0);
    const Tensor p = softmax(z);
    double total = 0.0;
    for (int j = 0; j < c; ++j) {
      CHECK(p[j] >= 0.0);
      total += p[j];
    }
    CHECK(std::abs(total - 1.0) < 1e-9);

    Tensor shifted = z;
    const double offset = rng.uniform(0.0, 50.0);
    for (int j = 0; j < c; ++j) shifted[j] += offset;
    const Tensor p2 = softmax(shifted);
    for (int j = 0; j < c; ++j) CHECK(p2[j] == doctest::Approx(p[j]).epsilon(1e-12));

    const oracle::Vec ref = oracle::softmax(oracle::to_vec(z));
    for (int j = 0; j < c; ++j) CHECK(std::abs(p[j] - ref[j]) < 1e-14);
  }
}

TEST_CASE("softmax rejects non-finite logits") {
  Tensor bad = Tensor::vec({1.0, std::nan("")});
  CHECK_THROWS_AS(softmax(bad), ConfigError);
}
