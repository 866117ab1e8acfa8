#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include "fepca/inference.hpp"
#include "fepca/missing.hpp"
#include "fepca/pca.hpp"
#include "fepca/projection.hpp"
#include "fepca/rng.hpp"

namespace {

Eigen::MatrixXd noisy_rank2(int n, int p, double sigma, std::uint64_t seed) {
  fepca::Rng rng(seed);
  Eigen::MatrixXd u(n, 2), v(p, 2);
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < n; ++i) u(i, j) = rng.normal();
    for (int i = 0; i < p; ++i) v(i, j) = rng.normal();
  }
  Eigen::MatrixXd x = u * v.transpose();
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i) x(i, j) += sigma * rng.normal();
  return x;
}

void BM_FitPca(benchmark::State& state) {
  const Eigen::MatrixXd x = noisy_rank2(static_cast<int>(state.range(0)),
                                        static_cast<int>(state.range(1)), 0.3, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fepca::fit_pca(x, 2));
  }
}
BENCHMARK(BM_FitPca)->Args({10, 15})->Args({41, 10})->Args({20, 100});

void BM_ProjectionDiagonal(benchmark::State& state) {
  const Eigen::MatrixXd x = noisy_rank2(20, 100, 0.3, 7);
  const fepca::PcaFit fit = fepca::fit_pca(x, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fepca::projection_diagonal(fit));
  }
}
BENCHMARK(BM_ProjectionDiagonal);

void BM_ApplyProjection(benchmark::State& state) {
  const Eigen::MatrixXd x = noisy_rank2(20, 100, 0.3, 7);
  const fepca::PcaFit fit = fepca::fit_pca(x, 2);
  const Eigen::MatrixXd z = noisy_rank2(20, 100, 1.0, 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fepca::apply_projection(fit, z));
  }
}
BENCHMARK(BM_ApplyProjection);

void BM_SingleCellImputation(benchmark::State& state) {
  const Eigen::MatrixXd x = noisy_rank2(10, 15, 0.6, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fepca::em_pca(fepca::MaskedMatrix::without_cell(x, 3, 5), 2));
  }
}
BENCHMARK(BM_SingleCellImputation);

void BM_Bootstrap(benchmark::State& state) {
  const Eigen::MatrixXd x = noisy_rank2(10, 15, 0.6, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        fepca::parametric_bootstrap(x, 2, static_cast<int>(state.range(0)), 11));
  }
}
BENCHMARK(BM_Bootstrap)->Arg(100);

void BM_ApproxJackknife(benchmark::State& state) {
  const Eigen::MatrixXd x = noisy_rank2(10, 15, 0.6, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fepca::approximate_jackknife(x, 2));
  }
}
BENCHMARK(BM_ApproxJackknife);

}  // namespace

BENCHMARK_MAIN();
