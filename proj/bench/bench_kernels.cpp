#include <benchmark/benchmark.h>

#include <algorithm>
#include <random>
#include <vector>

#include "gft/numcore/kernels.hpp"

namespace k = gft::numcore::kernels;

namespace {

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

template <bool Parallel>
void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_values(n * n, 1), b = random_values(n * n, 2);
  std::vector<double> c(n * n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      k::matmul_nn(a, b, c, n, n, n, false);
    } else {
      k::reference::matmul_nn(a, b, c, n, n, n, false);
    }
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * 2 * n * n * n);
}

template <bool Parallel>
void BM_PairwiseSqdist(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = random_values(n * 3, 3);
  std::vector<double> d(n * n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      k::pairwise_sqdist(p, p, d, n, n, 3);
    } else {
      k::reference::pairwise_sqdist(p, p, d, n, n, 3);
    }
    benchmark::DoNotOptimize(d.data());
  }
}

template <bool Parallel>
void BM_FpsUpdate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = random_values(n * 3, 4);
  std::vector<double> min_dist(n);
  for (auto _ : state) {
    std::fill(min_dist.begin(), min_dist.end(), 1e300);
    std::size_t next = 0;
    for (int it = 0; it < 128; ++it) {
      if constexpr (Parallel) {
        next = k::fps_update(p, min_dist, n, 3, next);
      } else {
        next = k::reference::fps_update(p, min_dist, n, 3, next);
      }
    }
    benchmark::DoNotOptimize(next);
  }
}

}  // namespace

BENCHMARK(BM_Matmul<false>)->Arg(64)->Arg(256);
BENCHMARK(BM_Matmul<true>)->Arg(64)->Arg(256);
BENCHMARK(BM_PairwiseSqdist<false>)->Arg(512)->Arg(2048);
BENCHMARK(BM_PairwiseSqdist<true>)->Arg(512)->Arg(2048);
BENCHMARK(BM_FpsUpdate<false>)->Arg(2048)->Arg(16384);
BENCHMARK(BM_FpsUpdate<true>)->Arg(2048)->Arg(16384);

BENCHMARK_MAIN();
