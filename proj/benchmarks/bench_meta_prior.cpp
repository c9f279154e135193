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

#include "metaprior/meta_prior.hpp"

namespace {

using namespace metaprior;

void BM_EstimateMetaPrior(benchmark::State& state) {
  // O(N) estimator over one category.
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<WeightPosterior> posteriors(n);
  for (auto& p : posteriors) p = {normal(rng), 0.1};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        estimate_category_meta_prior("k", posteriors).tau_sq_hat);
  }
  state.SetItemsProcessed(state.iterations() * n);
}

}  // namespace

BENCHMARK(BM_EstimateMetaPrior)->Arg(100)->Arg(10000)->Arg(1000000);
