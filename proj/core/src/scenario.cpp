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

#include "metaprior/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "metaprior/errors.hpp"
#include "metaprior/worker_pool.hpp"

namespace metaprior {

namespace {

// Keeps only retained indices of a sparse vector.
LabeledExample masked(const LabeledExample& example,
                      const std::vector<bool>& mask) {
  LabeledExample out;
  out.label = example.label;
  for (std::size_t k = 0; k < example.x.indices.size(); ++k) {
    const auto i = static_cast<std::size_t>(example.x.indices[k]);
    if (i < mask.size() && mask[i]) {
      out.x.push_back(example.x.indices[k], example.x.values[k]);
    }
  }
  return out;
}

void train_masked(BlipModel& model, std::span<const LabeledExample> batch,
                  const std::vector<bool>* mask) {
  if (mask == nullptr) {
    model.train_batch(batch);
    return;
  }
  for (const auto& example : batch) {
    model.update(masked(example, *mask));
  }
}

double evaluate_log_loss(const BlipModel& model,
                         std::span<const LabeledExample> test,
                         const std::vector<bool>* mask) {
  std::vector<double> predictions;
  std::vector<int> labels;
  predictions.reserve(test.size());
  labels.reserve(test.size());
  for (const auto& example : test) {
    const LabeledExample ex =
        mask == nullptr ? example : masked(example, *mask);
    predictions.push_back(model.predict(ex.x));
    labels.push_back(example.label);
  }
  return log_loss(predictions, labels);
}

}  // namespace

ScenarioResult run_scenario(const ScenarioSpec& spec,
                            const DatasetStream& stream,
                            const FeatureSchema& schema) {
  const auto n_batches = static_cast<std::int64_t>(stream.batches.size());
  if (spec.reset_batch < 1 || spec.reset_batch > n_batches) {
    throw ConfigError("reset_batch must lie in [1, number of batches]");
  }
  if (stream.test.empty()) {
    throw ConfigError("run_scenario: stream has no test set");
  }
  if (spec.prior_override.has_value() &&
      (spec.prior_override->first <= 0.0 ||
       spec.prior_override->second <= 0.0)) {
    throw ConfigError("prior_override tau^2 values must be > 0");
  }

  const CategoryMap categories = schema.category_map();
  const PriorConfig default_prior;
  BlipModel model(categories, default_prior);

  // Data observed through batch t, in arrival order.
  std::vector<LabeledExample> observed;
  for (std::int64_t b = 0; b < spec.reset_batch; ++b) {
    observed.insert(observed.end(), stream.batches[b].begin(),
                    stream.batches[b].end());
  }

  ScenarioResult result;
  std::vector<bool> mask;  // empty until pruning runs
  const std::vector<bool>* mask_ptr = nullptr;
  std::optional<double> tau1_applied, tau2_applied;
  std::int64_t examples_seen = 0;

  const std::vector<std::string> groups = {kFirstOrderCategory,
                                           kSecondOrderCategory};

  for (std::int64_t b = 1; b <= n_batches; ++b) {
    const auto& batch = stream.batches[b - 1];
    train_masked(model, batch, mask_ptr);
    examples_seen += static_cast<std::int64_t>(batch.size());

    if (b == spec.reset_batch) {
      // Day-t machinery. The bootstrap trains a fresh model over the full
      // feature space; pruning then fixes the space for every scenario and
      // the estimate is taken over the retained features only.
      std::optional<BootstrapResult> bootstrap;
      if (spec.scenario != Scenario::kBlip &&
          !spec.prior_override.has_value()) {
        try {
          bootstrap = bootstrap_until_viable(default_prior, observed,
                                             spec.bootstrap, categories,
                                             groups, spec.zero_mean);
        } catch (const InsufficientTrafficError& e) {
          throw DegeneratePriorError(
              "meta-prior still degenerate after the bootstrap guardrail at "
              "reset batch " +
                  std::to_string(b) + ": " + e.what(),
              result.metrics, e.last_estimates);
        }
        result.bootstrap_epochs = bootstrap->epochs_used;
        result.bootstrap_consumption.assign(observed.size(), 0);
        for (const auto& epoch : bootstrap->epoch_example_ids) {
          for (std::size_t id : epoch) ++result.bootstrap_consumption[id];
        }
      }

      if (spec.pruning.has_value()) {
        const auto rows = static_cast<Eigen::Index>(observed.size());
        const auto cols = static_cast<Eigen::Index>(schema.dimension());
        Eigen::MatrixXd design = Eigen::MatrixXd::Zero(rows, cols);
        Eigen::VectorXd labels(rows);
        for (Eigen::Index r = 0; r < rows; ++r) {
          const auto& ex = observed[static_cast<std::size_t>(r)];
          for (std::size_t k = 0; k < ex.x.indices.size(); ++k) {
            design(r, ex.x.indices[k]) = ex.x.values[k];
          }
          labels[r] = static_cast<double>(ex.label);
        }
        const AdaptiveLassoResult pruned =
            adaptive_lasso_prune(design, labels, spec.pruning->config,
                                 spec.pruning->protect, categories);
        result.retained = pruned.retained;
        mask.assign(schema.dimension(), false);
        for (auto i : pruned.retained) mask[static_cast<std::size_t>(i)] = true;
        mask_ptr = &mask;
      }

      if (spec.scenario == Scenario::kBlipBayes) {
        std::vector<CategoryMetaPrior> estimates;
        if (spec.prior_override.has_value()) {
          estimates.push_back({kFirstOrderCategory, 0.0,
                               spec.prior_override->first, 0, false});
          estimates.push_back({kSecondOrderCategory, 0.0,
                               spec.prior_override->second, 0, false});
        } else {
          MetaPriorEstimateOptions est;
          est.zero_mean = spec.zero_mean;
          est.min_tau_sq = spec.bootstrap.min_tau_sq;
          estimates = estimate_meta_prior(bootstrap->model.posteriors(),
                                          categories, groups, est, mask_ptr);
          const bool degenerate = std::any_of(
              estimates.begin(), estimates.end(),
              [](const CategoryMetaPrior& m) { return m.degenerate; });
          if (degenerate) {
            throw DegeneratePriorError(
                "meta-prior degenerate after bootstrap and pruning "
                "guardrails at reset batch " +
                    std::to_string(b),
                result.metrics, estimates);
          }
        }
        result.tau_estimates = estimates;
        for (const auto& m : estimates) {
          if (m.category_id == kFirstOrderCategory) tau1_applied = m.tau_sq_hat;
          if (m.category_id == kSecondOrderCategory) tau2_applied = m.tau_sq_hat;
        }
        PriorConfig eb_prior;  // bias keeps the N(0,1) default
        for (const auto& m : estimates) {
          eb_prior.per_category[m.category_id] =
              GaussianPrior{0.0, m.tau_sq_hat};
        }
        model.reset_with_prior(eb_prior);
        // Retrain on the original batches 1..t in original order.
        for (std::int64_t rb = 0; rb < spec.reset_batch; ++rb) {
          train_masked(model, stream.batches[rb], mask_ptr);
        }
      } else if (spec.scenario == Scenario::kBlipTwice) {
        // Same bootstrapped data as blip_bayes, applied to the running
        // model, then the original data once more. No reset.
        if (bootstrap.has_value()) {
          for (const auto& epoch : bootstrap->epoch_example_ids) {
            for (std::size_t id : epoch) model.update(observed[id]);
          }
        }
        for (std::int64_t rb = 0; rb < spec.reset_batch; ++rb) {
          train_masked(model, stream.batches[rb], mask_ptr);
        }
      }
    }

    if (b >= spec.reset_batch || spec.evaluate_from_first) {
      MetricsRow row;
      row.batch = b;
      row.t = examples_seen;
      row.log_loss = evaluate_log_loss(model, stream.test, mask_ptr);
      row.tau1_hat = tau1_applied;
      row.tau2_hat = tau2_applied;
      result.metrics.rows.push_back(row);
    }
  }
  return result;
}

std::vector<std::pair<std::string, ScenarioResult>> run_tau_sweep(
    const ScenarioSpec& base, const DatasetStream& stream,
    const FeatureSchema& schema,
    const std::vector<std::pair<double, double>>& overrides) {
  for (const auto& [t1, t2] : overrides) {
    if (t1 <= 0.0 || t2 <= 0.0) {
      throw ConfigError("tau sweep overrides must be > 0");
    }
  }
  std::vector<std::pair<std::string, ScenarioResult>> out;

  ScenarioSpec blip = base;
  blip.scenario = Scenario::kBlip;
  blip.prior_override.reset();
  out.emplace_back("blip", run_scenario(blip, stream, schema));

  ScenarioSpec optimal = base;
  optimal.scenario = Scenario::kBlipBayes;
  optimal.prior_override.reset();
  out.emplace_back("optimal", run_scenario(optimal, stream, schema));

  for (const auto& override_pair : overrides) {
    ScenarioSpec spec = base;
    spec.scenario = Scenario::kBlipBayes;
    spec.prior_override = override_pair;
    std::string name = "tau_" + std::to_string(override_pair.first) + "_" +
                       std::to_string(override_pair.second);
    out.emplace_back(std::move(name), run_scenario(spec, stream, schema));
  }
  return out;
}

BanditAbResult run_bandit_ab(const EnvironmentSpec& env_template,
                             const BanditRunConfig& config,
                             const EbResetConfig& eb_config,
                             const std::vector<std::uint64_t>& seeds,
                             std::size_t max_workers) {
  if (seeds.empty()) {
    throw ConfigError("run_bandit_ab: need at least one seed");
  }
  BanditAbResult result;
  result.seeds = seeds;
  result.standard_runs.resize(seeds.size());
  result.eb_runs.resize(seeds.size());

  parallel_for(seeds.size(), max_workers, [&](std::size_t i) {
    const std::uint64_t seed = seeds[i];
    EnvironmentSpec env_spec = env_template;
    env_spec.seed = derive_seed(seed, "ab_env");
    const Environment env = generate_environment(env_spec);

    std::vector<double> uniforms(static_cast<std::size_t>(config.horizon));
    Rng rng = make_rng(derive_seed(seed, "ab_reward_uniforms"));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (auto& u : uniforms) u = unit(rng);

    BanditRunConfig run = config;
    run.seed = derive_seed(seed, "ab_policy_rng");
    result.standard_runs[i] =
        run_bandit(env, BanditPolicy::kStandard, run, {}, uniforms);
    result.eb_runs[i] =
        run_bandit(env, BanditPolicy::kEmpiricalBayes, run, eb_config, uniforms);
  });
  return result;
}

}  // namespace metaprior
