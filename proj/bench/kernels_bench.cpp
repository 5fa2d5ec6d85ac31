// Serial reference kernels against their OpenMP versions, plus one ISR pass.

#include <benchmark/benchmark.h>

#include <numeric>

#include "isorank/isr.hpp"
#include "isorank/kernels.hpp"
#include "isorank/rng.hpp"
#include "isorank/sampling.hpp"
#include "isorank/synth.hpp"

using namespace isorank;

namespace {

Matrix noise(int n, int d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(n, d);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) m(i, k) = rng.uniform() - 0.5;
  return m;
}

IndexList first(int count) {
  IndexList v(static_cast<std::size_t>(count));
  std::iota(v.begin(), v.end(), 0);
  return v;
}

template <kernels::Exec E>
void BM_RestrictedCentered(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Matrix Y = noise(n, n, 1);
  const IndexList rows = first(n / 2), cols = first(n);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::restricted_centered(Y, rows, cols, E));
}

template <kernels::Exec E>
void BM_CorrectedGram(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Matrix A = noise(n, 2 * n, 2), B = noise(n, 2 * n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::corrected_gram(A, B, E));
}

template <kernels::Exec E>
void BM_WeightedRowSums(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Matrix Y = noise(n, n, 4);
  const IndexList rows = first(n), cols = first(n);
  const std::vector<double> w(static_cast<std::size_t>(n), 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::weighted_row_sums(Y, rows, cols, w, E));
}

void BM_SymmetricMatvecSerial(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Matrix S = kernels::serial::gram(noise(n, n, 5));
  const Vector x = Vector::Ones(n);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::symmetric_matvec(S, x));
}

void BM_SymmetricMatvecOmp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Matrix S = kernels::serial::gram(noise(n, n, 5));
  const Vector x = Vector::Ones(n);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::omp::symmetric_matvec(S, x));
}

void BM_TopEigenDense(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Matrix S = kernels::serial::gram(noise(n, n, 6));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::top_eigenpair_dense(S));
}

void BM_TopEigenPower(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Matrix S = kernels::serial::gram(noise(n, n, 6));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::top_eigenpair_power(S));
}

template <kernels::Exec E>
void BM_RunIsr(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto inst = synth::gen_isotonic(n, n, synth::Family::UniformSorted, 7, 1.0);
  const auto batches = sampling::subsample_batches(sampling::poissonize(inst, {}, 8), 1, 9);
  auto cfg = isr::practical_preset(n, n, 1.0);
  cfg.exec = E;
  for (auto _ : state) benchmark::DoNotOptimize(isr::run_isr(batches, cfg));
}

}  // namespace

BENCHMARK_TEMPLATE(BM_RestrictedCentered, kernels::Exec::Serial)->Arg(128)->Arg(512);
BENCHMARK_TEMPLATE(BM_RestrictedCentered, kernels::Exec::Parallel)->Arg(128)->Arg(512);
BENCHMARK_TEMPLATE(BM_CorrectedGram, kernels::Exec::Serial)->Arg(64)->Arg(256);
BENCHMARK_TEMPLATE(BM_CorrectedGram, kernels::Exec::Parallel)->Arg(64)->Arg(256);
BENCHMARK_TEMPLATE(BM_WeightedRowSums, kernels::Exec::Serial)->Arg(256)->Arg(1024);
BENCHMARK_TEMPLATE(BM_WeightedRowSums, kernels::Exec::Parallel)->Arg(256)->Arg(1024);
BENCHMARK(BM_SymmetricMatvecSerial)->Arg(256)->Arg(1024);
BENCHMARK(BM_SymmetricMatvecOmp)->Arg(256)->Arg(1024);
BENCHMARK(BM_TopEigenDense)->Arg(64)->Arg(256);
BENCHMARK(BM_TopEigenPower)->Arg(64)->Arg(256);
BENCHMARK_TEMPLATE(BM_RunIsr, kernels::Exec::Serial)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_RunIsr, kernels::Exec::Parallel)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
