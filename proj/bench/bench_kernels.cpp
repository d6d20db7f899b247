// Serial reference kernels against their OpenMP counterparts.
//   ./actpc_bench --benchmark_filter=gemv

#include <random>

#include <benchmark/benchmark.h>

#include "actpc/kernels.hpp"

using namespace actpc;

namespace {

Matrix<float> random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n(0.0f, 1.0f);
  Matrix<float> m(r, c);
  for (auto& v : m.flat()) v = n(rng);
  return m;
}

Vec<float> random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> d(0.0f, 1.0f);
  Vec<float> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

template <bool Parallel>
void BM_gemv(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, n, 1);
  const auto x = random_vec(n, 2);
  Vec<float> y(n);
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::parallel::gemv<float>(a, x, y);
    else
      kernels::serial::gemv<float>(a, x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}

template <bool Parallel>
void BM_outer(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto d = random_matrix(n, n, 3);
  const auto u = random_vec(n, 4);
  const auto v = random_vec(n, 5);
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::parallel::outer_acc<float>(d, u, v, 1e-6f);
    else
      kernels::serial::outer_acc<float>(d, u, v, 1e-6f);
    benchmark::DoNotOptimize(d.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}

template <bool Parallel>
void BM_adam(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto p = random_matrix(n, n, 6);
  const auto d = random_matrix(n, n, 7);
  Matrix<float> m(n, n), v(n, n);
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::parallel::adam_ascent<float>(p.flat(), d.flat(), m.flat(), v.flat(), 1e-3f, 0.9f, 0.999f, 1e-8f,
                                            0.1f, 0.001f);
    else
      kernels::serial::adam_ascent<float>(p.flat(), d.flat(), m.flat(), v.flat(), 1e-3f, 0.9f, 0.999f, 1e-8f,
                                          0.1f, 0.001f);
    benchmark::DoNotOptimize(p.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}

}  // namespace

BENCHMARK(BM_gemv<false>)->Name("gemv/serial")->RangeMultiplier(4)->Range(32, 2048);
BENCHMARK(BM_gemv<true>)->Name("gemv/parallel")->RangeMultiplier(4)->Range(32, 2048);
BENCHMARK(BM_outer<false>)->Name("outer/serial")->RangeMultiplier(4)->Range(32, 2048);
BENCHMARK(BM_outer<true>)->Name("outer/parallel")->RangeMultiplier(4)->Range(32, 2048);
BENCHMARK(BM_adam<false>)->Name("adam/serial")->RangeMultiplier(4)->Range(32, 2048);
BENCHMARK(BM_adam<true>)->Name("adam/parallel")->RangeMultiplier(4)->Range(32, 2048);

BENCHMARK_MAIN();
