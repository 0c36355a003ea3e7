#include <benchmark/benchmark.h>

#include "balkwise/inference.hpp"
#include "balkwise/pricing.hpp"
#include "balkwise/simulator.hpp"
#include "balkwise/stationary.hpp"

namespace {

using namespace balkwise;

const ModelConfig kAnchor(1.0, 1.0, 1.0, 15.0);
const Vector kTheta0 = scalar_theta(0.02);

QueuePath make_path(std::size_t steps) {
  const ExponentialFamily fam;
  SimOptions o;
  o.steps = steps;
  o.seed = 1;
  return simulate_path(kAnchor, fam, kTheta0, o);
}

void BM_Simulate(benchmark::State& state) {
  const ExponentialFamily fam;
  SimOptions o;
  o.steps = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    ++o.seed;
    benchmark::DoNotOptimize(simulate_path(kAnchor, fam, kTheta0, o));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Simulate)->Arg(1000)->Arg(100000);

void BM_CountTransitions(benchmark::State& state) {
  const QueuePath path = make_path(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(count_transitions(path));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CountTransitions)->Arg(10000)->Arg(1000000);

void BM_LogLikelihood(benchmark::State& state) {
  const ExponentialFamily fam;
  const TransitionCounts c = count_transitions(make_path(100000));
  for (auto _ : state) benchmark::DoNotOptimize(log_likelihood(c, kTheta0, kAnchor, fam));
}
BENCHMARK(BM_LogLikelihood);

void BM_FitMle(benchmark::State& state) {
  const ExponentialFamily fam;
  const TransitionCounts c = count_transitions(make_path(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(fit_mle(c, kAnchor, fam));
}
BENCHMARK(BM_FitMle)->Arg(1000)->Arg(100000);

void BM_Stationary(benchmark::State& state) {
  const ExponentialFamily fam;
  for (auto _ : state) benchmark::DoNotOptimize(stationary_distribution(kTheta0, kAnchor, fam));
}
BENCHMARK(BM_Stationary);

void BM_TheoreticalSigma(benchmark::State& state) {
  const ExponentialFamily fam;
  for (auto _ : state) benchmark::DoNotOptimize(theoretical_sigma(kTheta0, kAnchor, fam));
}
BENCHMARK(BM_TheoreticalSigma);

void BM_RevenueArgmax(benchmark::State& state) {
  const ExponentialFamily fam;
  for (auto _ : state) benchmark::DoNotOptimize(revenue_maximizing_price(kTheta0, kAnchor, fam));
}
BENCHMARK(BM_RevenueArgmax);

void BM_StdArgmin(benchmark::State& state) {
  const ExponentialFamily fam;
  for (auto _ : state) benchmark::DoNotOptimize(std_minimizing_price(kTheta0, kAnchor, fam));
}
BENCHMARK(BM_StdArgmin);

void BM_PricingRun(benchmark::State& state) {
  const ExponentialFamily fam;
  PricingConfig p;
  p.schedule = Schedule::doubling;
  p.k1_min = 100;
  p.p1 = 100.0;
  p.observation_budget = 1500;
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_pricing(kAnchor, fam, kTheta0, p, ++seed));
}
BENCHMARK(BM_PricingRun);

}  // namespace

BENCHMARK_MAIN();
