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

#ifndef METAPRIOR_BANDIT_HPP_
#define METAPRIOR_BANDIT_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "metaprior/environment.hpp"
#include "metaprior/feature_space.hpp"
#include "metaprior/meta_prior.hpp"
#include "metaprior/metrics.hpp"
#include "metaprior/probit.hpp"
#include "metaprior/rng.hpp"

namespace metaprior {

// Fixed arm table over a layout space (or an explicit allow-list), sorted
// lexicographically so argmax ties resolve to the lowest layout.
class ArmSet {
 public:
  ArmSet(const LayoutEncoder& encoder,
         std::optional<std::vector<Layout>> allow_list = std::nullopt,
         std::uint64_t enumeration_cap = 10000);

  std::size_t size() const { return layouts_.size(); }
  const std::vector<Layout>& layouts() const { return layouts_; }
  const std::vector<SparseVector>& encodings() const { return encodings_; }

  // Index of the arm maximizing the dense linear score; ties go to the
  // lexicographically lowest layout. Throws ConfigError on an empty set.
  std::size_t argmax(std::span<const double> weights) const;

 private:
  std::vector<Layout> layouts_;
  std::vector<SparseVector> encodings_;
};

enum class BanditPhase { kRandom, kLearning };

// Thompson-sampling combinatorial bandit state: a probit model over layout
// encodings plus the arm set. Single-writer; copy freely for replicated
// simulations.
class BanditState {
 public:
  struct Options {
    bool normalize_encoding = false;
    std::optional<std::vector<Layout>> allow_list;
    std::uint64_t enumeration_cap = 10000;
    std::uint64_t seed = 0;
    std::int32_t hill_climb_restarts = 8;
    std::int32_t hill_climb_sweeps = 10;
  };

  BanditState(LayoutSpace space, const PriorConfig& prior, Options options);

  BlipModel& model() { return model_; }
  const BlipModel& model() const { return model_; }
  const LayoutEncoder& encoder() const { return encoder_; }
  const ArmSet* arms() const { return arms_ ? &*arms_ : nullptr; }

  BanditPhase phase() const { return phase_; }
  void set_phase(BanditPhase phase) { phase_ = phase; }

  Rng& rng() { return rng_; }

  // Samples one weight per feature from its posterior and plays the arm
  // with the highest sampled linear score (the probit link is monotone, so
  // this matches maximizing the predicted success probability). Exhaustive
  // over the arm table when one exists, hill climbing otherwise.
  // Requires phase() == kLearning.
  Layout thompson_select();

  // Uniform draw over the arm set. Requires phase() == kRandom.
  Layout select_random();

 private:
  LayoutEncoder encoder_;
  std::optional<ArmSet> arms_;  // empty for spaces above the enumeration cap
  BlipModel model_;
  BanditPhase phase_ = BanditPhase::kRandom;
  Rng rng_;
  Options options_;
  std::vector<double> sampled_;  // scratch
};

// Greedy hill climbing with random restarts over the layout space: each
// restart starts from a random layout and sweeps the widgets in a fresh
// random order, setting each to the content maximizing the linear score
// with the others fixed, until a local optimum or max_sweeps sweeps.
// Returns the best layout found across restarts.
Layout hill_climb(std::span<const double> sampled_weights,
                  const LayoutEncoder& encoder, std::int32_t restarts,
                  std::int32_t max_sweeps, Rng& rng);

// Phi(mu*' x_opt) - Phi(mu*' x_chosen), the per-round shortfall versus the
// exhaustive optimum. Throws ConfigError when the space exceeds
// enumeration_cap (switch the run to hill-climb-certified regret instead).
double instantaneous_regret(const Environment& env, const Layout& chosen,
                            const LayoutEncoder& encoder,
                            std::uint64_t enumeration_cap = 10000);

struct RegretRecord {
  std::int64_t t = 0;
  Layout chosen;
  double instantaneous = 0.0;
  double cumulative = 0.0;
};

// One row of the replayable interaction log.
struct InteractionRecord {
  std::int64_t t = 0;
  Layout layout;
  SparseVector x;
  std::int8_t reward = 1;
  BanditPhase phase = BanditPhase::kRandom;
};

// Line-delimited interaction log: {"t":..,"layout":[..],"indices":[..],
// "reward":-1|1,"phase":"random"|"learning"}.
void write_interaction_log(std::span<const InteractionRecord> log,
                           const std::string& path);
std::vector<InteractionRecord> read_interaction_log(const std::string& path);

enum class BanditPolicy { kStandard, kEmpiricalBayes };

struct EbResetConfig {
  // Injected (tau1^2, tau2^2); skips estimation entirely when set.
  std::optional<std::pair<double, double>> prior_override;
  bool zero_mean = true;
  double min_tau_sq = kDefaultMinTauSq;
  // Epoch-training guardrail applied when the direct estimate is degenerate.
  bool bootstrap_on_degenerate = true;
  BootstrapConfig bootstrap;
};

struct BanditRunConfig {
  std::int64_t horizon = 0;              // T
  std::int64_t random_phase_rounds = 0;  // must be < horizon
  std::int64_t batch_size = 100;
  std::uint64_t seed = 0;
  double success_baseline = 0.0;  // rel_baseline = cum_success - baseline
  bool normalize_encoding = false;
  std::uint64_t enumeration_cap = 10000;
  std::int32_t hill_climb_restarts = 8;
  std::int32_t hill_climb_sweeps = 10;
  bool keep_round_records = false;   // per-round RegretRecords
  bool keep_regret_curve = true;     // per-round cumulative regret
  bool keep_interaction_log = false;
  std::optional<std::vector<Layout>> allow_list;
};

struct BanditRunResult {
  MetricsSeries metrics;  // one row per completed batch
  std::vector<RegretRecord> records;
  std::vector<double> cumulative_regret;
  std::vector<InteractionRecord> interaction_log;
  std::vector<CategoryMetaPrior> eb_estimates;  // as applied at reset
  std::optional<std::int64_t> plateau;
  double final_cumulative_regret = 0.0;
  double final_cumulative_success = 0.0;
  std::int64_t rounds = 0;
};

// Raised when the EB reset cannot produce a viable prior after guardrails;
// carries whatever metrics were gathered up to the failure and the last
// (degenerate) estimates.
class DegeneratePriorError : public ModelError {
 public:
  DegeneratePriorError(const std::string& what, MetricsSeries partial,
                       std::vector<CategoryMetaPrior> estimates = {})
      : ModelError(what),
        partial_metrics(std::move(partial)),
        last_estimates(std::move(estimates)) {}

  MetricsSeries partial_metrics;
  std::vector<CategoryMetaPrior> last_estimates;
};

// Full simulation: a uniform random phase, then (for the EB policy) meta
// prior estimation from the random-phase model, a prior reset, and an exact
// replay of the recorded random-phase traffic, then Thompson sampling to
// the horizon. Posterior updates happen every batch_size rounds. Rewards
// come from the environment's probit truth through the per-round uniforms
// in `reward_uniforms` when provided (common random numbers across paired
// policies), else from a seeded stream.
BanditRunResult run_bandit(const Environment& env, BanditPolicy policy,
                           const BanditRunConfig& config,
                           const EbResetConfig& eb_config = {},
                           std::span<const double> reward_uniforms = {});

}  // namespace metaprior

#endif  // METAPRIOR_BANDIT_HPP_
