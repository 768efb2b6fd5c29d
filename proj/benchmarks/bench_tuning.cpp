#include <benchmark/benchmark.h>

#include "tempered/rng.hpp"
#include "tempered/tuning.hpp"

using namespace tempered;

namespace {

Dataset make_data(long n, int p, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  d.X.resize(n, p);
  d.y.resize(n);
  for (long i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) d.X(i, j) = rng.gauss();
    d.y[i] = d.X(i, 0) - 0.5 * d.X(i, 1) + rng.gauss();
  }
  return d;
}

}  // namespace

static void BM_LppdLoo(benchmark::State& state) {
  const Dataset d = make_data(state.range(0), 3, 1);
  double alpha = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lppd_loo(d, alpha));
    alpha += 1e-6;  // defeat caching of the result
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LppdLoo)->Arg(100)->Arg(1000)->Arg(5000);

static void BM_LppdLooVi(benchmark::State& state) {
  const Dataset d = make_data(state.range(0), 3, 2);
  double alpha = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lppd_loo_vi(d, alpha));
    alpha += 1e-6;
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LppdLooVi)->Arg(1000);

static void BM_Press(benchmark::State& state) {
  const Dataset d = make_data(state.range(0), 3, 3);
  double alpha = 2.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(press(d, alpha));
    alpha += 1e-6;
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Press)->Arg(1000)->Arg(5000);

static void BM_SafeBayesLoss(benchmark::State& state) {
  const Dataset d = make_data(state.range(0), 3, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(safe_bayes_loss(d, 0.7));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SafeBayesLoss)->Arg(1000)->Arg(5000);

static void BM_TuneBcvFullGrid(benchmark::State& state) {
  const Dataset d = make_data(state.range(0), 2, 5);
  const Grid grid = Grid::simulation_default(Method::BCV);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tune(d, Method::BCV, grid, 1));
  }
}
BENCHMARK(BM_TuneBcvFullGrid)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
