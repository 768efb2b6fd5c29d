#include <benchmark/benchmark.h>

#include "tempered/linmodel.hpp"
#include "tempered/rng.hpp"

using namespace tempered;

namespace {

Dataset make_data(long n, int p, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  d.X.resize(n, p);
  d.y.resize(n);
  for (long i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) d.X(i, j) = rng.gauss();
    d.y[i] = rng.gauss();
  }
  return d;
}

}  // namespace

static void BM_RidgePosterior(benchmark::State& state) {
  const Dataset d = make_data(state.range(0), 3, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ridge_posterior(d, 0.5, Prior::UnitGaussian));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RidgePosterior)->Arg(1000)->Arg(30000);

static void BM_EstimateSigma2(benchmark::State& state) {
  const Dataset d = make_data(state.range(0), 5, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_sigma2(d));
  }
}
BENCHMARK(BM_EstimateSigma2)->Arg(30000);
