#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "vcg/design.hpp"
#include "vcg/distribution.hpp"
#include "vcg/estimator.hpp"
#include "vcg/preprocess.hpp"
#include "vcg/simulate.hpp"

namespace {

vcg::SimSpec full_scale() {
  vcg::SimSpec s;
  s.n = 81;
  s.T = 31;
  s.lag = 3;
  s.lambda = Eigen::Vector3d(1e-4, 1e-4, 1e-4).asDiagonal();
  return s;
}

void BM_HpTrend(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> N(0.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (auto& v : x) v = N(rng);
  for (auto _ : state) benchmark::DoNotOptimize(vcg::hp_trend(x));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_HpTrend)->RangeMultiplier(4)->Range(32, 8192)->Complexity(benchmark::oN);

void BM_Gini(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::lognormal_distribution<double> inc(8.0, 1.0);
  vcg::IncomeGrid g;
  g.pop = 1.0;
  for (auto& c : g.centiles) c = inc(rng);
  std::sort(g.centiles.begin(), g.centiles.end());
  for (auto _ : state) benchmark::DoNotOptimize(vcg::gini(g));
}
BENCHMARK(BM_Gini);

void BM_BuildStacked(benchmark::State& state) {
  const auto aligned = vcg::lag_align(vcg::generate_panel(full_scale()).panel, vcg::DependentVariable::y, 3);
  for (auto _ : state) benchmark::DoNotOptimize(vcg::build_stacked(aligned));
}
BENCHMARK(BM_BuildStacked)->Unit(benchmark::kMicrosecond);

void BM_GeneratePanel(benchmark::State& state) {
  const auto spec = full_scale();
  std::size_t rep = 0;
  for (auto _ : state) benchmark::DoNotOptimize(vcg::generate_panel(spec, rep++));
}
BENCHMARK(BM_GeneratePanel)->Unit(benchmark::kMillisecond);

void BM_FitIterated(benchmark::State& state) {
  const auto d =
      vcg::build_stacked(vcg::lag_align(vcg::generate_panel(full_scale()).panel, vcg::DependentVariable::y, 3));
  for (auto _ : state) benchmark::DoNotOptimize(vcg::fit_iterated(d));
}
BENCHMARK(BM_FitIterated)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
