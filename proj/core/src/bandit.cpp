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

#include "metaprior/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "metaprior/errors.hpp"
#include "metaprior/math.hpp"

namespace metaprior {

using nlohmann::json;

ArmSet::ArmSet(const LayoutEncoder& encoder,
               std::optional<std::vector<Layout>> allow_list,
               std::uint64_t enumeration_cap) {
  if (allow_list.has_value()) {
    if (allow_list->empty()) {
      throw ConfigError("arm allow-list must be non-empty");
    }
    layouts_ = std::move(*allow_list);
    std::sort(layouts_.begin(), layouts_.end());
    layouts_.erase(std::unique(layouts_.begin(), layouts_.end()),
                   layouts_.end());
  } else {
    layouts_ = encoder.enumerate(enumeration_cap);
  }
  encodings_.reserve(layouts_.size());
  for (const auto& layout : layouts_) {
    encodings_.push_back(encoder.encode(layout));  // validates ranges
  }
}

std::size_t ArmSet::argmax(std::span<const double> weights) const {
  if (layouts_.empty()) throw ConfigError("empty arm set");
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < encodings_.size(); ++a) {
    double score = 0.0;
    const auto& x = encodings_[a];
    for (std::size_t k = 0; k < x.indices.size(); ++k) {
      score += weights[static_cast<std::size_t>(x.indices[k])] * x.values[k];
    }
    if (score > best_score) {  // strict: first (lowest) layout wins ties
      best_score = score;
      best = a;
    }
  }
  return best;
}

BanditState::BanditState(LayoutSpace space, const PriorConfig& prior,
                         Options options)
    : encoder_(std::move(space), options.normalize_encoding),
      model_(encoder_.schema().category_map(), prior),
      rng_(make_rng(options.seed)),
      options_(options) {
  const bool enumerable =
      encoder_.space().total_layouts() <= options.enumeration_cap;
  if (options.allow_list.has_value() || enumerable) {
    arms_.emplace(encoder_, std::move(options.allow_list),
                  options.enumeration_cap);
  }
  sampled_.resize(model_.dimension());
}

Layout BanditState::thompson_select() {
  if (phase_ != BanditPhase::kLearning) {
    throw ConfigError("thompson_select requires the learning phase");
  }
  std::normal_distribution<double> standard(0.0, 1.0);
  const auto& posteriors = model_.posteriors();
  for (std::size_t i = 0; i < posteriors.size(); ++i) {
    sampled_[i] =
        posteriors[i].mean + std::sqrt(posteriors[i].variance) * standard(rng_);
  }
  if (arms_) {
    return arms_->layouts()[arms_->argmax(sampled_)];
  }
  return hill_climb(sampled_, encoder_, options_.hill_climb_restarts,
                    options_.hill_climb_sweeps, rng_);
}

Layout BanditState::select_random() {
  if (phase_ != BanditPhase::kRandom) {
    throw ConfigError("select_random requires the random phase");
  }
  if (!arms_ || arms_->size() == 0) {
    throw ConfigError("random selection needs an enumerable arm set");
  }
  std::uniform_int_distribution<std::size_t> pick(0, arms_->size() - 1);
  return arms_->layouts()[pick(rng_)];
}

Layout hill_climb(std::span<const double> sampled_weights,
                  const LayoutEncoder& encoder, std::int32_t restarts,
                  std::int32_t max_sweeps, Rng& rng) {
  if (restarts < 1 || max_sweeps < 1) {
    throw ConfigError("hill_climb: restarts and max_sweeps must be >= 1");
  }
  const auto& space = encoder.space();
  const std::size_t d = space.widget_count();

  Layout best;
  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::int32_t s = 0; s < restarts; ++s) {
    Layout current;
    current.choices.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
      std::uniform_int_distribution<std::int32_t> pick(1, space.variations[i]);
      current.choices[i] = pick(rng);
    }
    double current_score = encoder.score(current, sampled_weights);

    for (std::int32_t sweep = 0; sweep < max_sweeps; ++sweep) {
      std::shuffle(order.begin(), order.end(), rng);
      bool improved = false;
      for (std::size_t w : order) {
        std::int32_t best_choice = current.choices[w];
        double best_local = current_score;
        const std::int32_t original = current.choices[w];
        for (std::int32_t c = 1; c <= space.variations[w]; ++c) {
          if (c == original) continue;
          current.choices[w] = c;
          const double score = encoder.score(current, sampled_weights);
          if (score > best_local) {
            best_local = score;
            best_choice = c;
          }
        }
        current.choices[w] = best_choice;
        if (best_local > current_score) {
          current_score = best_local;
          improved = true;
        }
      }
      if (!improved) break;  // local optimum
    }
    if (current_score > best_score ||
        (current_score == best_score && current < best)) {
      best_score = current_score;
      best = current;
    }
  }
  return best;
}

double instantaneous_regret(const Environment& env, const Layout& chosen,
                            const LayoutEncoder& encoder,
                            std::uint64_t enumeration_cap) {
  if (encoder.space().total_layouts() > enumeration_cap) {
    throw ConfigError(
        "arm set too large for the exhaustive optimum; run with "
        "hill-climb-certified regret instead");
  }
  const ArmSet arms(encoder, std::nullopt, enumeration_cap);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& x : arms.encodings()) {
    best = std::max(best, env.true_score(x));
  }
  const double chosen_score = env.true_score(encoder.encode(chosen));
  return math::probit_cdf(best) - math::probit_cdf(chosen_score);
}

void write_interaction_log(std::span<const InteractionRecord> log,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write interaction log: " + path);
  for (const auto& rec : log) {
    json line{{"t", rec.t},
              {"layout", rec.layout.choices},
              {"indices", rec.x.indices},
              {"reward", static_cast<int>(rec.reward)},
              {"phase", rec.phase == BanditPhase::kRandom ? "random"
                                                          : "learning"}};
    out << line.dump() << "\n";
  }
  if (!out) throw IoError("write failure on interaction log: " + path);
}

std::vector<InteractionRecord> read_interaction_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open interaction log: " + path);
  std::vector<InteractionRecord> log;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw IoError("interaction log parse error in " + path + ": " +
                    e.what());
    }
    InteractionRecord r;
    r.t = rec.at("t").get<std::int64_t>();
    r.layout.choices = rec.at("layout").get<std::vector<std::int32_t>>();
    r.x.indices = rec.at("indices").get<std::vector<std::int32_t>>();
    r.x.values.assign(r.x.indices.size(), 1.0);
    r.reward = static_cast<std::int8_t>(rec.at("reward").get<int>());
    r.phase = rec.at("phase").get<std::string>() == "random"
                  ? BanditPhase::kRandom
                  : BanditPhase::kLearning;
    log.push_back(std::move(r));
  }
  return log;
}

namespace {

PriorConfig eb_prior_from(const std::vector<CategoryMetaPrior>& estimates) {
  PriorConfig prior;  // bias and anything unlisted keep the N(0,1) default
  for (const auto& m : estimates) {
    prior.per_category[m.category_id] = GaussianPrior{0.0, m.tau_sq_hat};
  }
  return prior;
}

}  // namespace

BanditRunResult run_bandit(const Environment& env, BanditPolicy policy,
                           const BanditRunConfig& config,
                           const EbResetConfig& eb_config,
                           std::span<const double> reward_uniforms) {
  if (!env.spec.layout.has_value()) {
    throw ConfigError("run_bandit: environment has no layout space");
  }
  if (config.horizon < config.random_phase_rounds || config.horizon < 1) {
    throw ConfigError("run_bandit: horizon must cover the random phase");
  }
  if (config.batch_size < 1) {
    throw ConfigError("run_bandit: batch_size must be >= 1");
  }
  if (!reward_uniforms.empty() &&
      reward_uniforms.size() < static_cast<std::size_t>(config.horizon)) {
    throw ConfigError("run_bandit: reward_uniforms shorter than horizon");
  }

  BanditState::Options options;
  options.normalize_encoding = config.normalize_encoding;
  options.allow_list = config.allow_list;
  options.enumeration_cap = config.enumeration_cap;
  options.seed = derive_seed(config.seed, "bandit_selection");
  options.hill_climb_restarts = config.hill_climb_restarts;
  options.hill_climb_sweeps = config.hill_climb_sweeps;

  BanditState state(*env.spec.layout, PriorConfig{}, options);
  if (state.encoder().dimension() != env.true_weights.size()) {
    throw ConfigError("run_bandit: environment dimension mismatch");
  }

  // Per-arm truth, for O(1) reward sampling and regret.
  const ArmSet* arms = state.arms();
  if (arms == nullptr) {
    throw ConfigError(
        "run_bandit: layout space exceeds the enumeration cap; supply an "
        "allow-list");
  }
  std::vector<double> success_probability(arms->size());
  std::vector<double> true_value(arms->size());
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < arms->size(); ++a) {
    true_value[a] = env.true_score(arms->encodings()[a]);
    success_probability[a] = math::probit_cdf(true_value[a]);
    best_value = std::max(best_value, success_probability[a]);
  }
  auto arm_index_of = [&](const Layout& layout) {
    const auto it = std::lower_bound(arms->layouts().begin(),
                                     arms->layouts().end(), layout);
    return static_cast<std::size_t>(it - arms->layouts().begin());
  };

  Rng reward_rng = make_rng(derive_seed(config.seed, "bandit_rewards"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto next_uniform = [&](std::int64_t t) {
    return reward_uniforms.empty()
               ? unit(reward_rng)
               : reward_uniforms[static_cast<std::size_t>(t - 1)];
  };

  BanditRunResult result;
  if (config.keep_regret_curve) {
    result.cumulative_regret.reserve(config.horizon);
  }

  std::vector<InteractionRecord> log;
  log.reserve(static_cast<std::size_t>(config.random_phase_rounds));
  std::vector<LabeledExample> batch_buffer;
  batch_buffer.reserve(static_cast<std::size_t>(config.batch_size));

  double cumulative_regret = 0.0;
  std::int64_t successes = 0;
  std::int64_t batch_successes = 0;
  std::int64_t batch_rounds = 0;
  std::int64_t batch_index = 0;
  std::optional<double> tau1_applied, tau2_applied;

  auto flush_batch = [&]() {
    if (!batch_buffer.empty()) {
      state.model().train_batch(batch_buffer);
      batch_buffer.clear();
    }
  };
  auto emit_batch_row = [&](std::int64_t t) {
    if (batch_rounds == 0) return;
    ++batch_index;
    MetricsRow row;
    row.batch = batch_index;
    row.t = t;
    row.cum_success = static_cast<double>(successes) / static_cast<double>(t);
    // Per-batch success rate against the configured baseline constant.
    row.rel_baseline = static_cast<double>(batch_successes) /
                           static_cast<double>(batch_rounds) -
                       config.success_baseline;
    row.tau1_hat = tau1_applied;
    row.tau2_hat = tau2_applied;
    result.metrics.rows.push_back(row);
    batch_successes = 0;
    batch_rounds = 0;
  };

  auto play_round = [&](std::int64_t t, const Layout& chosen,
                        BanditPhase phase) {
    const std::size_t a = arm_index_of(chosen);
    const std::int8_t reward =
        next_uniform(t) < success_probability[a] ? std::int8_t{1}
                                                 : std::int8_t{-1};
    const double instantaneous = best_value - success_probability[a];
    cumulative_regret += instantaneous;
    if (reward == 1) ++successes;
    ++batch_rounds;
    if (reward == 1) ++batch_successes;

    if (config.keep_regret_curve) {
      result.cumulative_regret.push_back(cumulative_regret);
    }
    if (config.keep_round_records) {
      result.records.push_back({t, chosen, instantaneous, cumulative_regret});
    }
    InteractionRecord rec{t, chosen, arms->encodings()[a], reward, phase};
    if (phase == BanditPhase::kRandom || config.keep_interaction_log) {
      log.push_back(rec);
    }
    batch_buffer.push_back(LabeledExample{rec.x, reward});
    if (static_cast<std::int64_t>(batch_buffer.size()) == config.batch_size) {
      flush_batch();
      emit_batch_row(t);
    }
  };

  // Phase 1: uniform exploration.
  state.set_phase(BanditPhase::kRandom);
  for (std::int64_t t = 1; t <= config.random_phase_rounds; ++t) {
    play_round(t, state.select_random(), BanditPhase::kRandom);
  }
  flush_batch();
  emit_batch_row(config.random_phase_rounds);

  // EB reset: estimate from the random-phase posteriors, re-prior, replay.
  if (policy == BanditPolicy::kEmpiricalBayes) {
    const std::vector<std::string> groups = {kFirstOrderCategory,
                                             kSecondOrderCategory};
    std::vector<CategoryMetaPrior> estimates;
    if (eb_config.prior_override.has_value()) {
      if (eb_config.prior_override->first <= 0.0 ||
          eb_config.prior_override->second <= 0.0) {
        throw ConfigError("prior_override tau^2 values must be > 0");
      }
      estimates.push_back({kFirstOrderCategory, 0.0,
                           eb_config.prior_override->first, 0, false});
      estimates.push_back({kSecondOrderCategory, 0.0,
                           eb_config.prior_override->second, 0, false});
    } else {
      MetaPriorEstimateOptions est;
      est.zero_mean = eb_config.zero_mean;
      est.min_tau_sq = eb_config.min_tau_sq;
      estimates = estimate_meta_prior(state.model().posteriors(),
                                      state.model().categories(), groups, est);
      const bool degenerate =
          std::any_of(estimates.begin(), estimates.end(),
                      [](const CategoryMetaPrior& m) { return m.degenerate; });
      if (degenerate && eb_config.bootstrap_on_degenerate) {
        std::vector<LabeledExample> replay;
        replay.reserve(log.size());
        for (const auto& rec : log) replay.push_back({rec.x, rec.reward});
        BootstrapConfig bootstrap = eb_config.bootstrap;
        bootstrap.min_tau_sq = eb_config.min_tau_sq;
        if (bootstrap.seed == 0) {
          bootstrap.seed = derive_seed(config.seed, "bandit_bootstrap");
        }
        try {
          estimates = bootstrap_until_viable(
                          PriorConfig{}, replay, bootstrap,
                          state.model().categories(), groups,
                          eb_config.zero_mean)
                          .estimates;
        } catch (const InsufficientTrafficError& e) {
          throw DegeneratePriorError(
              std::string("EB prior degenerate after bootstrap guardrail: ") +
                  e.what(),
              std::move(result.metrics), e.last_estimates);
        }
      } else if (degenerate) {
        throw DegeneratePriorError(
            "EB prior estimate degenerate and no guardrail enabled",
            std::move(result.metrics), estimates);
      }
    }
    result.eb_estimates = estimates;
    for (const auto& m : estimates) {
      if (m.category_id == kFirstOrderCategory) tau1_applied = m.tau_sq_hat;
      if (m.category_id == kSecondOrderCategory) tau2_applied = m.tau_sq_hat;
    }

    state.model().reset_with_prior(eb_prior_from(estimates));
    // Replay the recorded random traffic in original order and batching.
    std::vector<LabeledExample> replay_batch;
    replay_batch.reserve(static_cast<std::size_t>(config.batch_size));
    for (const auto& rec : log) {
      replay_batch.push_back({rec.x, rec.reward});
      if (static_cast<std::int64_t>(replay_batch.size()) ==
          config.batch_size) {
        state.model().train_batch(replay_batch);
        replay_batch.clear();
      }
    }
    if (!replay_batch.empty()) state.model().train_batch(replay_batch);
  }
  if (!config.keep_interaction_log) log.clear();

  // Phase 2: Thompson sampling.
  state.set_phase(BanditPhase::kLearning);
  for (std::int64_t t = config.random_phase_rounds + 1; t <= config.horizon;
       ++t) {
    play_round(t, state.thompson_select(), BanditPhase::kLearning);
  }
  flush_batch();
  emit_batch_row(config.horizon);

  result.rounds = config.horizon;
  result.final_cumulative_regret = cumulative_regret;
  result.final_cumulative_success =
      static_cast<double>(successes) / static_cast<double>(config.horizon);
  if (config.keep_regret_curve) {
    result.plateau = plateau_round(result.cumulative_regret);
  }
  if (config.keep_interaction_log) {
    result.interaction_log = std::move(log);
  }
  return result;
}

}  // namespace metaprior
