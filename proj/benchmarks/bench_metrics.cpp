#include <benchmark/benchmark.h>

#include "tempered/mcmc.hpp"
#include "tempered/metrics.hpp"

using namespace tempered;

static void BM_Tv1d(benchmark::State& state) {
  const auto a = DistributionHandle::gaussian1d(0.0, 1.0);
  const auto b = DistributionHandle::gaussian1d(0.5, 1.3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tv_distance(a, b));
  }
}
BENCHMARK(BM_Tv1d);

static void BM_WassersteinQuantile1d(benchmark::State& state) {
  const auto a = DistributionHandle::gaussian1d(0.0, 1.0);
  const auto b = DistributionHandle::gaussian1d(1.0, 2.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(wasserstein_p(a, b, 2));
  }
  state.SetLabel("10k quantile nodes");
}
BENCHMARK(BM_WassersteinQuantile1d)->Unit(benchmark::kMillisecond);

static void BM_RwMetropolis1d(benchmark::State& state) {
  McmcConfig cfg;
  cfg.m_samples = static_cast<int>(state.range(0));
  cfg.burn_in = 1000;
  cfg.seed = 3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        rw_metropolis_1d([](double x) { return -0.5 * x * x; }, 0.0, 2.38, cfg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RwMetropolis1d)->Arg(10000)->Unit(benchmark::kMillisecond);
