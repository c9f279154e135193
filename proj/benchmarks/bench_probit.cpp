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

#include "metaprior/probit.hpp"

namespace {

using namespace metaprior;

BlipModel make_model(std::size_t dim) {
  CategoryMap map;
  map.names = {"w"};
  map.of_feature.assign(dim, 0);
  return BlipModel(map, PriorConfig{});
}

std::vector<LabeledExample> make_traffic(std::size_t dim, std::size_t active,
                                         std::size_t count) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::int32_t> pick(
      0, static_cast<std::int32_t>(dim - 1));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<LabeledExample> traffic(count);
  for (auto& ex : traffic) {
    std::vector<std::int32_t> idx;
    while (idx.size() < active) {
      const auto i = pick(rng);
      if (std::find(idx.begin(), idx.end(), i) == idx.end()) idx.push_back(i);
    }
    std::sort(idx.begin(), idx.end());
    for (auto i : idx) ex.x.push_back(i, 1.0);
    ex.label = unit(rng) < 0.5 ? 1 : -1;
  }
  return traffic;
}

void BM_AdfUpdate(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto active = static_cast<std::size_t>(state.range(1));
  BlipModel model = make_model(dim);
  const auto traffic = make_traffic(dim, active, 4096);
  std::size_t i = 0;
  for (auto _ : state) {
    model.update(traffic[i++ & 4095]);
    benchmark::DoNotOptimize(model.posteriors().data());
  }
  state.SetItemsProcessed(state.iterations());
}

void BM_Predict(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto active = static_cast<std::size_t>(state.range(1));
  BlipModel model = make_model(dim);
  const auto traffic = make_traffic(dim, active, 4096);
  model.train_batch(traffic);
  std::size_t i = 0;
  double sink = 0.0;
  for (auto _ : state) {
    sink += model.predict(traffic[i++ & 4095].x);
  }
  benchmark::DoNotOptimize(sink);
  state.SetItemsProcessed(state.iterations());
}

}  // namespace

BENCHMARK(BM_AdfUpdate)->Args({48, 11})->Args({1009, 22})->Args({5000, 92});
BENCHMARK(BM_Predict)->Args({48, 11})->Args({1009, 22})->Args({5000, 92});
