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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <vector>

#include "metaprior/bandit.hpp"
#include "metaprior/errors.hpp"
#include "metaprior/math.hpp"
#include "support/oracles.hpp"

using namespace metaprior;

namespace {

Environment flat_environment(LayoutSpace space, double tau1_sq, double tau2_sq,
                             std::uint64_t seed) {
  EnvironmentSpec spec;
  spec.layout = space;
  spec.schema = LayoutEncoder(space).schema();
  spec.category_priors[kFirstOrderCategory] = {0.0, tau1_sq};
  spec.category_priors[kSecondOrderCategory] = {0.0, tau2_sq};
  spec.seed = seed;
  return generate_environment(spec);
}

}  // namespace

TEST_CASE("ArmSet ordering and argmax tie-breaking") {
  LayoutEncoder enc(LayoutSpace{{2, 2}});
  ArmSet arms(enc);
  REQUIRE(arms.size() == 4);
  CHECK(arms.layouts()[0] == Layout{{1, 1}});
  CHECK(arms.layouts()[3] == Layout{{2, 2}});

  // All-equal weights: every arm scores identically; lowest layout wins.
  const std::vector<double> flat(enc.dimension(), 0.25);
  CHECK(arms.argmax(flat) == 0);

  SUBCASE("allow-list is deduplicated and sorted") {
    ArmSet listed(enc, std::vector<Layout>{Layout{{2, 1}}, Layout{{1, 2}},
                                           Layout{{2, 1}}});
    REQUIRE(listed.size() == 2);
    CHECK(listed.layouts()[0] == Layout{{1, 2}});
  }

  SUBCASE("empty allow-list is rejected") {
    CHECK_THROWS_AS(ArmSet(enc, std::vector<Layout>{}), ConfigError);
  }
}

TEST_CASE("select_random is uniform, seeded, and phase-guarded") {
  BanditState::Options options;
  options.seed = 17;
  BanditState state(LayoutSpace{{4, 3, 2}}, PriorConfig{}, options);
  REQUIRE(state.arms() != nullptr);
  const std::size_t n_arms = state.arms()->size();
  CHECK(n_arms == 24);

  SUBCASE("phase learning rejects random selection") {
    state.set_phase(BanditPhase::kLearning);
    CHECK_THROWS_AS(state.select_random(), ConfigError);
  }

  SUBCASE("counts sit within 5 sigma of uniform") {
    const std::size_t draws = 240000;
    std::map<std::vector<std::int32_t>, std::size_t> counts;
    for (std::size_t i = 0; i < draws; ++i) {
      counts[state.select_random().choices]++;
    }
    const double expected = static_cast<double>(draws) / n_arms;
    const double sigma = std::sqrt(expected * (1.0 - 1.0 / n_arms));
    for (const auto& [layout, count] : counts) {
      CHECK(std::abs(static_cast<double>(count) - expected) <= 5.0 * sigma);
    }
  }

  SUBCASE("fixed seed reproduces the sequence") {
    BanditState a(LayoutSpace{{4, 3, 2}}, PriorConfig{}, options);
    BanditState b(LayoutSpace{{4, 3, 2}}, PriorConfig{}, options);
    for (int i = 0; i < 50; ++i) {
      CHECK(a.select_random() == b.select_random());
    }
  }

  SUBCASE("singleton allow-list always returns that arm") {
    BanditState::Options single = options;
    single.allow_list = std::vector<Layout>{Layout{{2, 3, 1}}};
    BanditState s(LayoutSpace{{4, 3, 2}}, PriorConfig{}, single);
    for (int i = 0; i < 10; ++i) {
      CHECK(s.select_random() == Layout{{2, 3, 1}});
    }
  }
}

TEST_CASE("thompson_select degenerates to the plug-in argmax at tiny variance") {
  BanditState::Options options;
  options.seed = 5;
  BanditState state(LayoutSpace{{2, 2}}, PriorConfig{}, options);
  state.set_phase(BanditPhase::kLearning);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<WeightPosterior> posteriors(state.encoder().dimension());
  for (auto& p : posteriors) p = {normal(rng), 1e-8};
  state.model().set_posteriors(posteriors);

  std::vector<double> means(posteriors.size());
  for (std::size_t i = 0; i < means.size(); ++i) means[i] = posteriors[i].mean;
  const ArmSet arms(state.encoder());
  const Layout plug_in = arms.layouts()[arms.argmax(means)];
  for (int i = 0; i < 200; ++i) {
    CHECK(state.thompson_select() == plug_in);
  }
}

TEST_CASE("thompson_select frequencies match the Monte Carlo oracle") {
  const std::vector<int> vars = {2, 2};
  BanditState::Options options;
  options.seed = 23;
  BanditState state(LayoutSpace{{2, 2}}, PriorConfig{}, options);
  state.set_phase(BanditPhase::kLearning);

  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> var_draw(0.05, 0.6);
  const std::size_t dim = state.encoder().dimension();
  std::vector<WeightPosterior> posteriors(dim);
  std::vector<double> means(dim), variances(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    means[i] = 0.5 * normal(rng);
    variances[i] = var_draw(rng);
    posteriors[i] = {means[i], variances[i]};
  }
  state.model().set_posteriors(posteriors);

  const std::size_t draws = 100000;
  std::map<std::vector<std::int32_t>, double> frequency;
  for (std::size_t i = 0; i < draws; ++i) {
    frequency[state.thompson_select().choices] += 1.0;
  }
  for (auto& [k, v] : frequency) v /= static_cast<double>(draws);

  const auto oracle =
      oracles::mc_optimal_probabilities(vars, means, variances, draws, 555);
  const auto layouts = oracles::enumerate_layouts(vars);
  for (std::size_t a = 0; a < layouts.size(); ++a) {
    std::vector<std::int32_t> key(layouts[a].begin(), layouts[a].end());
    const double observed =
        frequency.count(key) > 0 ? frequency.at(key) : 0.0;
    CHECK(std::abs(observed - oracle[a]) <= 0.01);
  }
}

TEST_CASE("argmax is invariant to the monotone probit transform") {
  LayoutEncoder enc(LayoutSpace{{3, 2, 2}});
  const ArmSet arms(enc);
  std::mt19937_64 rng(19);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> weights(enc.dimension());
  for (int rep = 0; rep < 1000; ++rep) {
    // Scaled so scores stay clear of Phi's double-precision saturation,
    // where distinct scores collapse to 1.0 and no argmax is defined.
    for (auto& w : weights) w = 0.25 * normal(rng);
    std::size_t best_linear = arms.argmax(weights);
    // Recompute the argmax through Phi of the score.
    std::size_t best_phi = 0;
    double best_value = -1.0;
    for (std::size_t a = 0; a < arms.size(); ++a) {
      const double phi =
          math::probit_cdf(enc.score(arms.layouts()[a], weights));
      if (phi > best_value) {
        best_value = phi;
        best_phi = a;
      }
    }
    CHECK(best_linear == best_phi);
  }
}

TEST_CASE("hill climbing") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal(0.0, 1.0);

  SUBCASE("single widget is an exact argmax") {
    LayoutEncoder enc(LayoutSpace{{5}});
    std::vector<double> weights(enc.dimension());
    for (auto& w : weights) w = normal(rng);
    Rng hc_rng = make_rng(1);
    const Layout best = hill_climb(weights, enc, 1, 1, hc_rng);
    const std::vector<int> vars = {5};
    const auto oracle = oracles::exhaustive_best_layout(vars, weights);
    CHECK(std::vector<int>(best.choices.begin(), best.choices.end()) ==
          oracle);
  }

  SUBCASE("separable objective is solved in one sweep from any start") {
    LayoutEncoder enc(LayoutSpace{{3, 4, 2}});
    std::vector<double> weights(enc.dimension(), 0.0);
    // First-order weights only; interactions all zero.
    for (std::size_t i = 1; i <= enc.schema().first_order_count(); ++i) {
      weights[i] = normal(rng);
    }
    const std::vector<int> vars = {3, 4, 2};
    const auto oracle = oracles::exhaustive_best_layout(vars, weights);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng hc_rng = make_rng(seed);
      const Layout best = hill_climb(weights, enc, 1, 1, hc_rng);
      CHECK(std::vector<int>(best.choices.begin(), best.choices.end()) ==
            oracle);
    }
  }

  SUBCASE("random restarts find the exhaustive optimum almost always") {
    LayoutEncoder enc(LayoutSpace{{3, 3, 3}});
    const std::vector<int> vars = {3, 3, 3};
    int hits = 0;
    for (int draw = 0; draw < 50; ++draw) {
      std::vector<double> weights(enc.dimension());
      for (auto& w : weights) w = normal(rng);
      Rng hc_rng = make_rng(1000 + draw);
      const Layout best = hill_climb(weights, enc, 8, 10, hc_rng);
      const auto oracle = oracles::exhaustive_best_layout(vars, weights);
      if (std::vector<int>(best.choices.begin(), best.choices.end()) ==
          oracle) {
        ++hits;
      }
    }
    CHECK(hits >= 48);  // >= 95% of 50
  }
}

TEST_CASE("instantaneous regret") {
  LayoutSpace space{{2}};
  LayoutEncoder enc(space);
  EnvironmentSpec spec;
  spec.layout = space;
  spec.schema = enc.schema();
  Environment env;
  env.spec = spec;
  // Two arms with true scores 1.0 and 0.0: weights on the two first-order
  // indicators, everything else zero.
  env.true_weights.assign(enc.dimension(), 0.0);
  env.true_weights[1] = 1.0;
  env.true_weights[2] = 0.0;

  SUBCASE("optimal choice has zero regret") {
    CHECK(instantaneous_regret(env, Layout{{1}}, enc) == doctest::Approx(0.0));
  }

  SUBCASE("worse arm pays Phi(1) - Phi(0)") {
    // 0.341344746 frozen from the quadrature oracle.
    const double r = instantaneous_regret(env, Layout{{2}}, enc);
    CHECK(r == doctest::Approx(0.3413447461).epsilon(1e-7));
    CHECK(std::abs(r - 0.3413) <= 1e-4);
  }

  SUBCASE("regret is nonnegative and bounded by one") {
    for (const auto& layout : enc.enumerate()) {
      const double r = instantaneous_regret(env, layout, enc);
      CHECK(r >= 0.0);
      CHECK(r <= 1.0);
    }
  }

  SUBCASE("oversized spaces point to hill-climb-certified mode") {
    LayoutEncoder wide(LayoutSpace{{10, 10, 10, 10, 10}});
    Environment wide_env;
    wide_env.spec.layout = wide.space();
    wide_env.spec.schema = wide.schema();
    wide_env.true_weights.assign(wide.dimension(), 0.0);
    CHECK_THROWS_WITH_AS(
        instantaneous_regret(wide_env, Layout{{1, 1, 1, 1, 1}}, wide),
        doctest::Contains("hill-climb"), ConfigError);
  }
}

TEST_CASE("interaction log round trip") {
  LayoutEncoder enc(LayoutSpace{{2, 2}});
  std::vector<InteractionRecord> log;
  InteractionRecord a{1, Layout{{1, 2}}, enc.encode(Layout{{1, 2}}), +1,
                      BanditPhase::kRandom};
  InteractionRecord b{2, Layout{{2, 2}}, enc.encode(Layout{{2, 2}}), -1,
                      BanditPhase::kLearning};
  log.push_back(a);
  log.push_back(b);
  const std::string path = "interactions_test.jsonl";
  write_interaction_log(log, path);
  const auto loaded = read_interaction_log(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].layout == a.layout);
  CHECK(loaded[0].x.indices == a.x.indices);
  CHECK(loaded[0].reward == 1);
  CHECK(loaded[0].phase == BanditPhase::kRandom);
  CHECK(loaded[1].phase == BanditPhase::kLearning);
  std::remove(path.c_str());
}

TEST_CASE("run_bandit basics") {
  const Environment env =
      flat_environment(LayoutSpace{{2, 2}}, 0.6, 0.2, 999);

  BanditRunConfig config;
  config.horizon = 600;
  config.random_phase_rounds = 200;
  config.batch_size = 50;
  config.seed = 77;
  config.keep_round_records = true;

  SUBCASE("regret accounting invariants") {
    const auto result = run_bandit(env, BanditPolicy::kStandard, config);
    CHECK(result.rounds == 600);
    REQUIRE(result.records.size() == 600);
    double prev = 0.0;
    for (const auto& rec : result.records) {
      CHECK(rec.instantaneous >= 0.0);
      CHECK(rec.instantaneous <= 1.0);
      CHECK(rec.cumulative >= prev);
      prev = rec.cumulative;
    }
    CHECK(result.final_cumulative_regret ==
          doctest::Approx(result.records.back().cumulative));
    CHECK(result.metrics.rows.size() == 12);  // 600 / 50
  }

  SUBCASE("random-phase-only run pulls arms uniformly") {
    BanditRunConfig uniform_config = config;
    uniform_config.horizon = 240000;
    uniform_config.random_phase_rounds = 240000;
    uniform_config.batch_size = 240000;
    const auto result =
        run_bandit(env, BanditPolicy::kStandard, uniform_config);
    std::map<std::vector<std::int32_t>, std::size_t> counts;
    for (const auto& rec : result.records) counts[rec.chosen.choices]++;
    const double expected = 240000.0 / 4.0;
    const double sigma = std::sqrt(expected * (1.0 - 0.25));
    REQUIRE(counts.size() == 4);
    for (const auto& [k, c] : counts) {
      CHECK(std::abs(static_cast<double>(c) - expected) <= 5.0 * sigma);
    }
  }

  SUBCASE("identical reruns are byte-identical") {
    const auto a = run_bandit(env, BanditPolicy::kStandard, config);
    const auto b = run_bandit(env, BanditPolicy::kStandard, config);
    CHECK(a.cumulative_regret == b.cumulative_regret);
    CHECK(a.final_cumulative_success == b.final_cumulative_success);
  }

  SUBCASE("EB with injected tau^2 = (1,1) replays into the standard run") {
    EbResetConfig eb;
    eb.prior_override = std::make_pair(1.0, 1.0);
    const auto standard = run_bandit(env, BanditPolicy::kStandard, config);
    const auto injected =
        run_bandit(env, BanditPolicy::kEmpiricalBayes, config, eb);
    REQUIRE(standard.records.size() == injected.records.size());
    for (std::size_t i = 0; i < standard.records.size(); ++i) {
      CHECK(standard.records[i].chosen == injected.records[i].chosen);
    }
    CHECK(standard.cumulative_regret == injected.cumulative_regret);
    CHECK(injected.eb_estimates.size() == 2);
  }

  SUBCASE("EB estimates land in the metrics rows after the reset") {
    BanditRunConfig cfg = config;
    cfg.horizon = 2400;
    cfg.random_phase_rounds = 1200;
    EbResetConfig eb;
    const auto result = run_bandit(env, BanditPolicy::kEmpiricalBayes, cfg, eb);
    REQUIRE_FALSE(result.eb_estimates.empty());
    const auto& last = result.metrics.rows.back();
    REQUIRE(last.tau1_hat.has_value());
    CHECK(*last.tau1_hat ==
          doctest::Approx(result.eb_estimates[0].tau_sq_hat));
    // Rows before the reset carry no estimate.
    CHECK_FALSE(result.metrics.rows.front().tau1_hat.has_value());
  }

  SUBCASE("degenerate estimation without guardrails carries partial metrics") {
    BanditRunConfig cfg = config;
    cfg.horizon = 12;
    cfg.random_phase_rounds = 8;
    cfg.batch_size = 4;
    EbResetConfig eb;
    eb.bootstrap_on_degenerate = false;
    CHECK_THROWS_AS(run_bandit(env, BanditPolicy::kEmpiricalBayes, cfg, eb),
                    DegeneratePriorError);
    try {
      run_bandit(env, BanditPolicy::kEmpiricalBayes, cfg, eb);
    } catch (const DegeneratePriorError& e) {
      CHECK_FALSE(e.partial_metrics.rows.empty());
      CHECK_FALSE(e.last_estimates.empty());
    }
  }

  SUBCASE("horizon below the random phase is rejected") {
    BanditRunConfig bad = config;
    bad.horizon = 100;
    bad.random_phase_rounds = 200;
    CHECK_THROWS_AS(run_bandit(env, BanditPolicy::kStandard, bad),
                    ConfigError);
  }
}

TEST_CASE("thompson_select with a singleton allow-list returns that arm") {
  BanditState::Options options;
  options.seed = 2;
  options.allow_list = std::vector<Layout>{Layout{{2, 1}}};
  BanditState state(LayoutSpace{{2, 2}}, PriorConfig{}, options);
  state.set_phase(BanditPhase::kLearning);
  for (int i = 0; i < 20; ++i) {
    CHECK(state.thompson_select() == Layout{{2, 1}});
  }
}

TEST_CASE("average regret per round falls over the back half of a run") {
  const std::int64_t horizon = 16000;
  std::vector<std::vector<double>> std_rate, eb_rate;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Environment env =
        flat_environment(LayoutSpace{{2, 3, 3, 2}}, 0.6, 0.2, 100 + seed);
    BanditRunConfig config;
    config.horizon = horizon;
    config.random_phase_rounds = 1000;
    config.batch_size = 100;
    config.seed = 40 + seed;
    EbResetConfig eb;
    eb.bootstrap.max_epochs = 32;
    const auto standard = run_bandit(env, BanditPolicy::kStandard, config);
    const auto eb_run =
        run_bandit(env, BanditPolicy::kEmpiricalBayes, config, eb);
    auto per_round = [&](const BanditRunResult& r) {
      std::vector<double> rate(r.cumulative_regret.size());
      for (std::size_t t = 0; t < rate.size(); ++t) {
        rate[t] = r.cumulative_regret[t] / static_cast<double>(t + 1);
      }
      return rate;
    };
    std_rate.push_back(per_round(standard));
    eb_rate.push_back(per_round(eb_run));
  }
  auto median_at = [&](const std::vector<std::vector<double>>& curves,
                       std::size_t t) {
    std::vector<double> v;
    for (const auto& c : curves) v.push_back(c[t]);
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  for (const auto* curves : {&std_rate, &eb_rate}) {
    const double mid = median_at(*curves, horizon / 2 - 1);
    const double three_quarters = median_at(*curves, 3 * horizon / 4 - 1);
    const double end = median_at(*curves, horizon - 1);
    CHECK(three_quarters < mid);
    CHECK(end < three_quarters);
  }
}

TEST_CASE("relative-to-baseline is an affine shift of the batch rate") {
  const Environment env = flat_environment(LayoutSpace{{2, 2}}, 0.6, 0.2, 77);
  BanditRunConfig config;
  config.horizon = 800;
  config.random_phase_rounds = 200;
  config.batch_size = 100;
  config.seed = 12;
  const auto zero = run_bandit(env, BanditPolicy::kStandard, config);
  config.success_baseline = 0.3;
  const auto shifted = run_bandit(env, BanditPolicy::kStandard, config);
  REQUIRE(zero.metrics.rows.size() == shifted.metrics.rows.size());
  for (std::size_t i = 0; i < zero.metrics.rows.size(); ++i) {
    CHECK(*zero.metrics.rows[i].cum_success ==
          *shifted.metrics.rows[i].cum_success);
    CHECK(*shifted.metrics.rows[i].rel_baseline ==
          doctest::Approx(*zero.metrics.rows[i].rel_baseline - 0.3)
              .epsilon(1e-12));
  }
}

TEST_CASE("run_bandit with all arms equal has zero regret") {
  // tau^2 = 0 for both categories and zero means: every layout scores the
  // same, so every arm is optimal.
  const Environment env = flat_environment(LayoutSpace{{2, 2}}, 0.0, 0.0, 1);
  BanditRunConfig config;
  config.horizon = 400;
  config.random_phase_rounds = 100;
  config.batch_size = 100;
  config.seed = 3;
  const auto standard = run_bandit(env, BanditPolicy::kStandard, config);
  CHECK(standard.final_cumulative_regret == doctest::Approx(0.0));
  EbResetConfig eb;
  eb.prior_override = std::make_pair(1.0, 1.0);
  const auto eb_run = run_bandit(env, BanditPolicy::kEmpiricalBayes, config, eb);
  CHECK(eb_run.final_cumulative_regret == doctest::Approx(0.0));
}
