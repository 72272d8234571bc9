#include <benchmark/benchmark.h>

#include <limits>
#include <vector>

#include "topkcert/confidence_bounds.hpp"
#include "topkcert/radius_solver.hpp"
#include "topkcert/smoothing.hpp"
#include "topkcert/special_functions.hpp"
#include "topkcert/tightness.hpp"

namespace {

using namespace topkcert;

static void BM_StdNormalQuantile(benchmark::State& state) {
  double p = 1e-6;
  for (auto _ : state) {
    benchmark::DoNotOptimize(std_normal_quantile(p));
    p += 1e-7;
    if (p > 0.999999) p = 1e-6;
  }
}
BENCHMARK(BM_StdNormalQuantile);

static void BM_BetaQuantile(benchmark::State& state) {
  const auto shape = static_cast<double>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(beta_quantile(0.001, shape, shape * 0.5 + 1.0));
  }
}
BENCHMARK(BM_BetaQuantile)->Arg(100)->Arg(10000)->Arg(100000);

static void BM_BinomPvalue(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(binom_two_sided_pvalue(n / 2 + n / 20, n, 0.5));
  }
}
BENCHMARK(BM_BinomPvalue)->Arg(1000)->Arg(100000);

static void BM_SolveRadius(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_radius_t(0.7, 0.25, 2, 0.5, 1e-5));
  }
}
BENCHMARK(BM_SolveRadius);

static void BM_SampleUnderNoise(benchmark::State& state) {
  const NoiseModel noise(0.5);
  const SyntheticTabularClassifier classifier(
      10, {{0.5, 0.2, 0.1, 0.05, 0.05, 0.025, 0.025, 0.02, 0.02, 0.01}}, noise);
  const ExamplePoint point = classifier.anchor(0);
  const std::int64_t n = state.range(0);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        sample_under_noise(classifier, point, noise, n, seed++));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SampleUnderNoise)->Arg(10000)->Arg(100000);

static void BM_CertifyEndToEnd(benchmark::State& state) {
  const NoiseModel noise(0.5);
  const SyntheticTabularClassifier classifier(
      10, {{0.5, 0.2, 0.1, 0.05, 0.05, 0.025, 0.025, 0.02, 0.02, 0.01}}, noise);
  const ExamplePoint point = classifier.anchor(0);
  CertifyParams params;
  params.k = 3;
  params.n = state.range(0);
  params.alpha = 0.001;
  for (auto _ : state) {
    benchmark::DoNotOptimize(certify(classifier, point, 1, noise, params));
    ++params.seed;
  }
}
BENCHMARK(BM_CertifyEndToEnd)->Arg(10000)->Arg(100000);

static void BM_ConstructWorstCase(benchmark::State& state) {
  ProbabilityBounds bounds;
  bounds.target_label = 1;
  bounds.lower = 0.45;
  bounds.upper = {std::numeric_limits<double>::quiet_NaN(),
                  0.12, 0.10, 0.08, 0.07, 0.06, 0.05, 0.04, 0.03, 0.02};
  for (auto _ : state) {
    benchmark::DoNotOptimize(construct_worst_case(bounds, 3, 1.2));
  }
}
BENCHMARK(BM_ConstructWorstCase);

}  // namespace

BENCHMARK_MAIN();
