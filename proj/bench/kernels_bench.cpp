// Copyright 2026 The hemscast Authors
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

// Serial reference vs OpenMP kernel. Arg(0) = serial, Arg(1) = parallel.
#include <benchmark/benchmark.h>

#include <random>

#include "hems/datagen.hpp"
#include "hems/model.hpp"
#include "hems/simplex.hpp"

namespace {

using hems::ExecutionPolicy;

ExecutionPolicy policy_of(const benchmark::State& state) {
  return state.range(0) ? ExecutionPolicy::kParallel : ExecutionPolicy::kSerial;
}

void BM_LossAndGradients(benchmark::State& state) {
  hems::ModelConfig config;
  const auto weights = hems::init_model(config, 7);
  const auto profile = hems::random_profiles(1, 11)[0];
  const auto series =
      hems::generate_household(profile, hems::parse_timestamp("2023-01-02T00:00:00Z"), 14);
  std::vector<hems::ForecastSample> batch;
  for (std::size_t i = 0; i < 16; ++i) {
    batch.push_back(hems::make_sample(config, series, config.input_window + 24 * i, true));
  }
  hems::LossOptions options;
  options.policy = policy_of(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hems::loss_and_gradients(weights, batch, options));
  }
}
BENCHMARK(BM_LossAndGradients)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_PivotTableau(benchmark::State& state) {
  // Dispatch-LP sized tableau for a full day: 192 rows by 480 columns plus slack.
  const int rows = 193, cols = 481;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> base(static_cast<std::size_t>(rows) * cols);
  for (auto& v : base) v = u(rng);
  base[static_cast<std::size_t>(17) * cols + 40] = 2.0;
  auto tableau = base;
  for (auto _ : state) {
    state.PauseTiming();
    tableau = base;
    state.ResumeTiming();
    hems::pivot_tableau(tableau, rows, cols, 17, 40, policy_of(state));
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_PivotTableau)->Arg(0)->Arg(1);

void BM_GenerateCohort(benchmark::State& state) {
  const auto profiles = hems::random_profiles(30, 5);
  const auto start = hems::parse_timestamp("2023-01-02T00:00:00Z");
  for (auto _ : state) {
    benchmark::DoNotOptimize(hems::generate_cohort(profiles, start, 98, policy_of(state)));
  }
}
BENCHMARK(BM_GenerateCohort)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
