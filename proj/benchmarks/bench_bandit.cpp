// Copyright 2026 The metaprior Authors
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

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "metaprior/bandit.hpp"

namespace {

using namespace metaprior;

void BM_ThompsonSelect(benchmark::State& state) {
  BanditState::Options options;
  options.seed = 11;
  BanditState bandit(LayoutSpace{{2, 3, 3, 2}}, PriorConfig{}, options);
  bandit.set_phase(BanditPhase::kLearning);
  for (auto _ : state) {
    benchmark::DoNotOptimize(bandit.thompson_select());
  }
  state.SetItemsProcessed(state.iterations());
}

void BM_HillClimb(benchmark::State& state) {
  const auto widgets = static_cast<std::size_t>(state.range(0));
  LayoutSpace space;
  space.variations.assign(widgets, 5);
  LayoutEncoder encoder(space);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> weights(encoder.dimension());
  for (auto& w : weights) w = normal(rng);
  Rng hc_rng = make_rng(17);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hill_climb(weights, encoder, 8, 10, hc_rng));
  }
  state.SetItemsProcessed(state.iterations());
}

void BM_BanditRound(benchmark::State& state) {
  // Full simulated rounds, amortized over a short horizon.
  EnvironmentSpec spec;
  spec.layout = LayoutSpace{{2, 3, 3, 2}};
  spec.schema = LayoutEncoder(*spec.layout).schema();
  spec.category_priors[kFirstOrderCategory] = {0.0, 0.6};
  spec.category_priors[kSecondOrderCategory] = {0.0, 0.2};
  spec.seed = 5;
  const Environment env = generate_environment(spec);

  BanditRunConfig config;
  config.horizon = 5000;
  config.random_phase_rounds = 500;
  config.batch_size = 100;
  config.seed = 9;
  config.keep_regret_curve = false;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        run_bandit(env, BanditPolicy::kStandard, config));
  }
  state.SetItemsProcessed(state.iterations() * config.horizon);
}

}  // namespace

BENCHMARK(BM_ThompsonSelect);
BENCHMARK(BM_HillClimb)->Arg(4)->Arg(8)->Arg(12);
BENCHMARK(BM_BanditRound)->Unit(benchmark::kMillisecond);
