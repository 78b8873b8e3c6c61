// Times the serial reference kernels against the OpenMP backend, plus one
// full training step at benchmark scale.

#include <chrono>
#include <cstdio>

#include "cpr/data.hpp"
#include "cpr/kernels.hpp"
#include "cpr/rng.hpp"
#include "cpr/trainer.hpp"

using namespace cpr;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void bench_matmul(int m, int k, int n, int reps) {
  Rng rng(1);
  Tensor a({m, k}), b({n, k}), c({m, n});
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng.normal();
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = rng.normal();

  auto t0 = Clock::now();
  for (int r = 0; r < reps; ++r) {
    c.fill(0.0);
    kernels::serial::matmul_nt(a.data(), b.data(), c.data(), m, k, n);
  }
  const double serial_ms = ms_since(t0) / reps;

  kernels::set_backend(kernels::Backend::openmp);
  t0 = Clock::now();
  for (int r = 0; r < reps; ++r) {
    c.fill(0.0);
    kernels::matmul_nt(a.data(), b.data(), c.data(), m, k, n);
  }
  const double omp_ms = ms_since(t0) / reps;

  std::printf("matmul_nt %4dx%4dx%4d  serial %8.3f ms   openmp %8.3f ms   speedup %.2fx\n", m, k,
              n, serial_ms, omp_ms, serial_ms / omp_ms);
}

void bench_train_step(kernels::Backend backend, const char* label) {
  kernels::set_backend(backend);
  const DomainPair pair = gen_synthetic_pair({10, 5, 10}, 32, 50, {0.2, 0.5, 0.25}, 1);
  TrainConfig cfg;
  cfg.total_iters = 40;
  cfg.warmup_iters = 20;
  cfg.eval_interval = 1000;
  Trainer trainer(cfg, pair);
  Rng rng(2);
  BatchSampler sampler(pair.source, pair.target_train,
                       resolve_augment(cfg.augment, pair.target_train), cfg.batch_size, rng);
  auto t0 = Clock::now();
  for (int i = 0; i < cfg.total_iters; ++i) {
    auto [src, tgt] = sampler.next();
    trainer.step(src, tgt);
  }
  std::printf("train step (%s): %.3f ms/iter\n", label, ms_since(t0) / cfg.total_iters);
}

}  // namespace

int main() {
  std::printf("openmp compiled: %s, max threads: %d\n",
              kernels::openmp_compiled() ? "yes" : "no", kernels::max_threads());
  bench_matmul(108, 128, 128, 200);
  bench_matmul(512, 128, 128, 50);
  bench_matmul(1024, 256, 256, 10);
  bench_train_step(kernels::Backend::serial, "serial");
  bench_train_step(kernels::Backend::openmp, "openmp");
  return 0;
}
