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

#ifndef METAPRIOR_META_PRIOR_HPP_
#define METAPRIOR_META_PRIOR_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "metaprior/errors.hpp"
#include "metaprior/probit.hpp"

namespace metaprior {

inline constexpr double kDefaultMinTauSq = 1e-4;

// Empirical meta-prior for one feature category: the estimated hyper-mean
// nu_hat and hyper-variance tau_sq_hat of the Gaussian the category's true
// effects are drawn from. tau_sq_hat is stored raw (it can be negative when
// the posteriors have not escaped the initial prior); `degenerate` flags
// estimates at or below the viability threshold. Never silently clamped.
struct CategoryMetaPrior {
  std::string category_id;
  double nu_hat = 0.0;
  double tau_sq_hat = 0.0;
  std::size_t n_features = 0;
  bool degenerate = false;
};

// Controls the epoch-training guardrail for small-traffic estimation.
struct BootstrapConfig {
  // Resampled examples per epoch; 0 means the batch size. Plain repetition
  // (resample = false) always replays the whole batch, shuffled.
  std::size_t epoch_size = 0;
  std::size_t max_epochs = 16;
  bool resample = true;  // with replacement; false -> shuffled repeats
  std::uint64_t seed = 0;
  double min_tau_sq = kDefaultMinTauSq;
};

struct MetaPriorEstimateOptions {
  bool zero_mean = true;         // Eq.-style nu_k = 0 variant by default
  double min_tau_sq = kDefaultMinTauSq;
};

// Estimates (nu_hat, tau_sq_hat) for a single category from its posteriors.
//
// With zero_mean = false:
//   nu_hat     = mean of posterior means,
//   tau_sq_hat = sample variance of means (N-1 denominator)
//                minus the mean of posterior variances.        (needs N >= 2)
// With zero_mean = true:
//   nu_hat     = 0,
//   tau_sq_hat = mean over features of (mean^2 - variance).    (needs N >= 1)
//
// Throws ConfigError naming the category when it has too few features.
CategoryMetaPrior estimate_category_meta_prior(
    const std::string& category, std::span<const WeightPosterior> posteriors,
    const MetaPriorEstimateOptions& options = {});

// Estimates every category in `which` over the model-shaped posterior list.
// When `retained` is non-null, only features whose mask bit is set
// participate (post-pruning estimation).
std::vector<CategoryMetaPrior> estimate_meta_prior(
    const std::vector<WeightPosterior>& posteriors,
    const CategoryMap& categories, const std::vector<std::string>& which,
    const MetaPriorEstimateOptions& options = {},
    const std::vector<bool>* retained = nullptr);

// Expected bias of tau_sq_hat given the covariance matrix of the posterior
// means within one category:
//
//   bias = -(1 / (N (N-1))) * sum_{i != j} Cov[mu_i, mu_j]
//
// Zero for diagonal covariance (the uncorrelated, unbiased regime). Throws
// ConfigError on non-square or non-symmetric input or N < 2.
double bias_of_estimator(const Eigen::MatrixXd& cov_matrix);

// Raised when epoch training exhausts max_epochs without producing viable
// tau_sq_hat values for every category; carries the last estimates.
class InsufficientTrafficError : public ModelError {
 public:
  InsufficientTrafficError(const std::string& what,
                           std::vector<CategoryMetaPrior> last_estimates)
      : ModelError(what), last_estimates(std::move(last_estimates)) {}

  std::vector<CategoryMetaPrior> last_estimates;
};

struct BootstrapResult {
  BlipModel model;
  std::vector<CategoryMetaPrior> estimates;
  std::size_t epochs_used = 0;
  // Example ids (positions in the input batch) consumed per epoch, so a
  // caller can replay the identical data elsewhere.
  std::vector<std::vector<std::size_t>> epoch_example_ids;
};

// Trains a fresh model (initialized from `model_prior`) on resampled -- or
// plainly repeated, shuffled -- epochs of `batch`, re-estimating the meta
// prior after each epoch, and stops at the first epoch where every category
// in `which` clears config.min_tau_sq.
//
// Throws InsufficientTrafficError after config.max_epochs non-viable epochs,
// ConfigError on an empty batch.
BootstrapResult bootstrap_until_viable(
    const PriorConfig& model_prior, std::span<const LabeledExample> batch,
    const BootstrapConfig& config, const CategoryMap& categories,
    const std::vector<std::string>& which, bool zero_mean = true,
    const std::vector<bool>* retained = nullptr);

}  // namespace metaprior

#endif  // METAPRIOR_META_PRIOR_HPP_
