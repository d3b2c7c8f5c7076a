#include <benchmark/benchmark.h>

#include <random>

#include "gripstream/analytics.hpp"
#include "gripstream/stats.hpp"

namespace gs = gripstream;

namespace {

void BM_AnovaOneway(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z;
  std::vector<std::vector<double>> groups(4, std::vector<double>(static_cast<std::size_t>(state.range(0))));
  for (auto& g : groups)
    for (auto& y : g) y = z(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gs::anova_oneway(groups));
  }
}
BENCHMARK(BM_AnovaOneway)->Arg(10)->Arg(1000);

void BM_AnovaTwoway(benchmark::State& state) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> z;
  const auto reps = static_cast<std::size_t>(state.range(0));
  gs::TwoWayTable t(2, std::vector<std::vector<double>>(3, std::vector<double>(reps)));
  for (auto& row : t)
    for (auto& cell : row)
      for (auto& y : cell) y = z(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gs::anova_twoway(t));
  }
}
BENCHMARK(BM_AnovaTwoway)->Arg(20)->Arg(500);

void BM_FSurvival(benchmark::State& state) {
  double f = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gs::stats::f_survival(f, 3.0, 76.0));
    f = f > 20 ? 0.1 : f * 1.01;
  }
}
BENCHMARK(BM_FSurvival);

}  // namespace
