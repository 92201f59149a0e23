#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "wcons/kernels.hpp"
#include "wcons/network.hpp"

namespace k = wcons::kernels;

namespace {

struct Fixture {
  std::size_t n, m;
  std::vector<double> states, weights, out;

  Fixture(std::size_t agents, std::size_t levels) : n(agents), m(levels), states(agents * levels), out(agents * levels) {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> z;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> row(m);
      for (auto& v : row) v = z(rng) + static_cast<double>(i);
      std::sort(row.begin(), row.end());
      std::copy(row.begin(), row.end(), states.begin() + static_cast<std::ptrdiff_t>(i * m));
    }
    const auto w = wcons::metropolis_weights(wcons::NetworkSnapshot::cycle(n));
    weights.assign(w.data().begin(), w.data().end());
  }

  k::StackedView view() const { return {states, n, m}; }
};

template <bool Parallel>
void BM_MixLinear(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) {
    if constexpr (Parallel) k::omp::mix_linear(f.weights, f.view(), f.out);
    else k::serial::mix_linear(f.weights, f.view(), f.out);
    benchmark::DoNotOptimize(f.out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}

template <bool Parallel>
void BM_MixLp(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) {
    if constexpr (Parallel) k::omp::mix_lp(f.weights, f.view(), f.out, 3.0);
    else k::serial::mix_lp(f.weights, f.view(), f.out, 3.0);
    benchmark::DoNotOptimize(f.out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}

template <bool Parallel>
void BM_MaxPairwise(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) {
    const auto r = Parallel ? k::omp::max_pairwise_pow(f.view(), 2.0) : k::serial::max_pairwise_pow(f.view(), 2.0);
    benchmark::DoNotOptimize(r.value);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0) * state.range(1) / 2);
}

template <bool Parallel>
void BM_Envelope(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) {
    auto e = Parallel ? k::omp::envelope(f.view()) : k::serial::envelope(f.view());
    benchmark::DoNotOptimize(e.lo.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}

void Sizes(benchmark::internal::Benchmark* b) {
  for (long n : {8, 32, 128})
    for (long m : {1024, 8192}) b->Args({n, m});
}

}  // namespace

BENCHMARK(BM_MixLinear<false>)->Name("mix_linear/serial")->Apply(Sizes);
BENCHMARK(BM_MixLinear<true>)->Name("mix_linear/omp")->Apply(Sizes);
BENCHMARK(BM_MixLp<false>)->Name("mix_lp/serial")->Args({32, 1024});
BENCHMARK(BM_MixLp<true>)->Name("mix_lp/omp")->Args({32, 1024});
BENCHMARK(BM_MaxPairwise<false>)->Name("max_pairwise/serial")->Apply(Sizes);
BENCHMARK(BM_MaxPairwise<true>)->Name("max_pairwise/omp")->Apply(Sizes);
BENCHMARK(BM_Envelope<false>)->Name("envelope/serial")->Apply(Sizes);
BENCHMARK(BM_Envelope<true>)->Name("envelope/omp")->Apply(Sizes);

BENCHMARK_MAIN();
