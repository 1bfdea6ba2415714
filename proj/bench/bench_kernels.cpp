// Copyright 2026 The wcfa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Kernels against their serial reference transcriptions, and serial against
// OpenMP execution.

#include <benchmark/benchmark.h>

#include "wcfa/estimators.hpp"
#include "wcfa/inference.hpp"
#include "wcfa/model.hpp"
#include "wcfa/reference.hpp"
#include "wcfa/synthetic.hpp"

using namespace wcfa;

namespace {

const Hyperparameters kTheta{0.0, 1.0, 6.0, 5.0, 4.0, 2.0};

const TrialCorpus& corpus() {
  static const TrialCorpus c = [] {
    SyntheticSpec s;
    s.theta = kTheta;
    s.t_targets = 200;
    s.n_impostors_per_target = 200;
    s.l_scores_per_pair = 20;
    s.seed = 1;
    return generate_model_corpus(s);
  }();
  return c;
}

const CorpusIndex& index() {
  static const CorpusIndex i(corpus());
  return i;
}

Execution exec_of(const benchmark::State& state) {
  return state.range(1) ? Execution::parallel : Execution::serial;
}

void BM_WorstCaseReference(benchmark::State& state) {
  const EstimatorConfig cfg{2000, static_cast<std::size_t>(state.range(0)), 1};
  for (auto _ : state)
    benchmark::DoNotOptimize(reference::estimate_pfa_worst_case(corpus(), 1.0, cfg));
}

void BM_WorstCaseKernel(benchmark::State& state) {
  const EstimatorConfig cfg{2000, static_cast<std::size_t>(state.range(0)), 1};
  for (auto _ : state)
    benchmark::DoNotOptimize(estimate_pfa_worst_case(index(), 1.0, cfg, exec_of(state)));
}

void BM_SamplingReference(benchmark::State& state) {
  const EstimatorConfig cfg{1000, static_cast<std::size_t>(state.range(0)), 1};
  for (auto _ : state)
    benchmark::DoNotOptimize(reference::predict_pfa_sampling(kTheta, 1.0, cfg, 324));
}

void BM_SamplingKernel(benchmark::State& state) {
  const EstimatorConfig cfg{1000, static_cast<std::size_t>(state.range(0)), 1};
  const PredictOptions opts{.exec = exec_of(state)};
  for (auto _ : state) benchmark::DoNotOptimize(predict_pfa_sampling(kTheta, 1.0, cfg, opts));
}

void BM_ClosedForm(benchmark::State& state) {
  const EstimatorConfig cfg{1000, static_cast<std::size_t>(state.range(0)), 1};
  const PredictOptions opts{.exec = exec_of(state)};
  for (auto _ : state)
    benchmark::DoNotOptimize(predict_pfa_closed_form(kTheta, 1.0, cfg, opts));
}

void BM_BoundReference(benchmark::State& state) {
  const FitReport r = fit(corpus(), kTheta, {.max_iterations = 3});
  for (auto _ : state)
    benchmark::DoNotOptimize(reference::elbo(corpus(), r.posterior, r.hyperparameters));
}

void BM_BoundStatistics(benchmark::State& state) {
  const ScoreStatistics s = ScoreStatistics::from_corpus(corpus());
  const FitReport r = fit(s, kTheta, {.max_iterations = 3});
  for (auto _ : state) benchmark::DoNotOptimize(elbo(s, r.posterior, r.hyperparameters));
}

void BM_Fit(benchmark::State& state) {
  const ScoreStatistics s = ScoreStatistics::from_corpus(corpus());
  FitOptions o;
  o.max_iterations = 20;
  o.relative_tolerance = 0.0;
  o.exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(fit(s, std::nullopt, o));
}

}  // namespace

BENCHMARK(BM_WorstCaseReference)->Arg(1)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WorstCaseKernel)
    ->ArgsProduct({{1, 10, 100}, {0, 1}})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SamplingReference)->Arg(1)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SamplingKernel)
    ->ArgsProduct({{1, 10, 100, 1000}, {0, 1}})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ClosedForm)->ArgsProduct({{1, 100, 10000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BoundReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BoundStatistics)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Fit)->ArgsProduct({{0}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
