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

#ifndef METAPRIOR_SCENARIO_HPP_
#define METAPRIOR_SCENARIO_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "metaprior/bandit.hpp"
#include "metaprior/environment.hpp"
#include "metaprior/lasso.hpp"
#include "metaprior/meta_prior.hpp"
#include "metaprior/metrics.hpp"

namespace metaprior {

// The three batch-training scenarios. They run identically through the end
// of batch `reset_batch` (called t); they differ in what happens there:
//
//   kBlip      -- nothing; plain sequential batch training throughout.
//   kBlipBayes -- train a fresh model on bootstrapped epochs of the data
//                 observed so far, prune, estimate the per-category meta
//                 prior from the bootstrapped posteriors, reset the model
//                 with N(0, tau_hat_k^2), and retrain on the original
//                 batches 1..t before continuing.
//   kBlipTwice -- data-matched control: update the running model with the
//                 same bootstrapped epochs, then again with the original
//                 batches 1..t, with no prior reset.
enum class Scenario { kBlip, kBlipBayes, kBlipTwice };

struct LassoPruneSpec {
  LassoConfig config;
  std::vector<std::string> protect = {kBiasCategory, kFirstOrderCategory};
};

struct ScenarioSpec {
  Scenario scenario = Scenario::kBlipBayes;
  std::int64_t reset_batch = 1;  // t
  BootstrapConfig bootstrap;
  std::optional<LassoPruneSpec> pruning;  // empty -> no pruning
  // Injected (tau1^2, tau2^2); skips bootstrap + estimation when set.
  std::optional<std::pair<double, double>> prior_override;
  bool zero_mean = true;
  bool evaluate_from_first = false;  // diagnostic: evaluate before batch t too
};

struct ScenarioResult {
  MetricsSeries metrics;  // one row per evaluated batch
  std::vector<CategoryMetaPrior> tau_estimates;  // as applied at the reset
  std::size_t bootstrap_epochs = 0;
  // Encoded indices surviving pruning; empty when pruning was off.
  std::vector<std::int32_t> retained;
  // Count per pooled example id of how often the bootstrap phase consumed
  // it (data-accounting checks); empty when no bootstrap ran.
  std::vector<std::size_t> bootstrap_consumption;
};

// Runs one scenario over the stream's batches, evaluating test-set log loss
// after every batch from reset_batch onward. Throws DegeneratePriorError
// when the meta-prior stays degenerate through the guardrails.
ScenarioResult run_scenario(const ScenarioSpec& spec,
                            const DatasetStream& stream,
                            const FeatureSchema& schema);

// One blip_bayes run per tau^2 override on the identical stream, plus the
// EB-estimated setting ("optimal") and the plain blip reference. Names:
// "blip", "optimal", "tau_<v1>_<v2>".
std::vector<std::pair<std::string, ScenarioResult>> run_tau_sweep(
    const ScenarioSpec& base, const DatasetStream& stream,
    const FeatureSchema& schema,
    const std::vector<std::pair<double, double>>& overrides);

struct BanditAbResult {
  std::vector<std::uint64_t> seeds;
  std::vector<BanditRunResult> standard_runs;  // indexed like seeds
  std::vector<BanditRunResult> eb_runs;
};

// Paired A/B simulation with common random numbers: per seed, draws one
// environment and one reward-uniform stream, then runs the standard and EB
// policies against both. Seeds run as independent jobs on a bounded worker
// pool; results are aggregated in seed order after all jobs finish.
BanditAbResult run_bandit_ab(const EnvironmentSpec& env_template,
                             const BanditRunConfig& config,
                             const EbResetConfig& eb_config,
                             const std::vector<std::uint64_t>& seeds,
                             std::size_t max_workers = 0);

}  // namespace metaprior

#endif  // METAPRIOR_SCENARIO_HPP_
