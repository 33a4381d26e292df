// Micro-benchmarks for the hot kernels: dense multiply, Jacobi
// eigendecomposition, the Lyapunov solver, Lasso coordinate descent, the
// Dantzig LP, and simulation.

#include <benchmark/benchmark.h>

#include <vector>

#include "varscore/estimators.hpp"
#include "varscore/matrix.hpp"
#include "varscore/rng.hpp"
#include "varscore/var_model.hpp"

using namespace varscore;

namespace {

Matrix random_matrix(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
  return m;
}

VarModel bench_model(std::size_t M) {
  VarModel m;
  m.p = 1;
  m.M = M;
  Matrix a = random_matrix(M, 7);
  a *= 0.75 / operator_norm(a);
  m.coeffs = {a};
  return m;
}

void bm_mat_mul(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, 1);
  const Matrix b = random_matrix(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(mat_mul(a, b));
}

void bm_sym_eig(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Matrix a = random_matrix(n, 3);
  a = 0.5 * (a + a.transpose());
  for (auto _ : state) benchmark::DoNotOptimize(sym_eig(a));
}

void bm_lyapunov(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Matrix f = random_matrix(n, 4);
  f *= 0.8 / operator_norm(f);
  const Matrix q = Matrix::identity(n);
  for (auto _ : state) benchmark::DoNotOptimize(lyapunov_solve(f, q));
}

void bm_simulate(benchmark::State& state) {
  const std::size_t M = static_cast<std::size_t>(state.range(0));
  const VarModel m = bench_model(M);
  const NoiseSpec noise{NoiseKind::uniform, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(simulate(m, 1000, noise, 1000, 5));
}

void bm_lasso_row(benchmark::State& state) {
  const std::size_t M = static_cast<std::size_t>(state.range(0));
  const VarModel m = bench_model(M);
  const LaggedSample sample = simulate(m, 1000, NoiseSpec{NoiseKind::uniform, 1.0}, 1000, 6);
  LassoConfig cfg;
  cfg.lambda = default_lambda(sample);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_A(sample, cfg, FitMethod::lasso));
}

void bm_dantzig_row(benchmark::State& state) {
  const std::size_t M = static_cast<std::size_t>(state.range(0));
  const VarModel m = bench_model(M);
  const LaggedSample sample = simulate(m, 500, NoiseSpec{NoiseKind::uniform, 1.0}, 500, 8);
  LassoConfig cfg;
  cfg.lambda = default_lambda(sample);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_A(sample, cfg, FitMethod::dantzig));
}

BENCHMARK(bm_mat_mul)->Arg(30)->Arg(100);
BENCHMARK(bm_sym_eig)->Arg(30)->Arg(100);
BENCHMARK(bm_lyapunov)->Arg(30)->Arg(60);
BENCHMARK(bm_simulate)->Arg(30)->Arg(100);
BENCHMARK(bm_lasso_row)->Arg(30)->Arg(60);
BENCHMARK(bm_dantzig_row)->Arg(10)->Arg(20);

}  // namespace

BENCHMARK_MAIN();
