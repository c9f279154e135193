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

#include "metaprior/meta_prior.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "metaprior/rng.hpp"

namespace metaprior {

CategoryMetaPrior estimate_category_meta_prior(
    const std::string& category, std::span<const WeightPosterior> posteriors,
    const MetaPriorEstimateOptions& options) {
  const std::size_t n = posteriors.size();
  const std::size_t minimum = options.zero_mean ? 1 : 2;
  if (n < minimum) {
    throw ConfigError("category '" + category + "' has " + std::to_string(n) +
                      " feature(s); meta-prior estimation needs at least " +
                      std::to_string(minimum));
  }

  CategoryMetaPrior out;
  out.category_id = category;
  out.n_features = n;

  if (options.zero_mean) {
    double acc = 0.0;
    for (const auto& p : posteriors) acc += p.mean * p.mean - p.variance;
    out.nu_hat = 0.0;
    out.tau_sq_hat = acc / static_cast<double>(n);
  } else {
    double mean_sum = 0.0;
    double var_sum = 0.0;
    for (const auto& p : posteriors) {
      mean_sum += p.mean;
      var_sum += p.variance;
    }
    const double nu = mean_sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& p : posteriors) {
      const double d = p.mean - nu;
      ss += d * d;
    }
    out.nu_hat = nu;
    out.tau_sq_hat =
        ss / static_cast<double>(n - 1) - var_sum / static_cast<double>(n);
  }
  out.degenerate = out.tau_sq_hat <= options.min_tau_sq;
  return out;
}

std::vector<CategoryMetaPrior> estimate_meta_prior(
    const std::vector<WeightPosterior>& posteriors,
    const CategoryMap& categories, const std::vector<std::string>& which,
    const MetaPriorEstimateOptions& options,
    const std::vector<bool>* retained) {
  if (posteriors.size() != categories.of_feature.size()) {
    throw ConfigError("posterior list does not match category map dimension");
  }
  if (retained != nullptr && retained->size() != posteriors.size()) {
    throw ConfigError("retained mask does not match dimension");
  }
  std::vector<CategoryMetaPrior> out;
  out.reserve(which.size());
  for (const auto& name : which) {
    const std::uint32_t id = categories.id_of(name);
    std::vector<WeightPosterior> members;
    for (std::size_t i = 0; i < posteriors.size(); ++i) {
      if (categories.of_feature[i] != id) continue;
      if (retained != nullptr && !(*retained)[i]) continue;
      members.push_back(posteriors[i]);
    }
    out.push_back(estimate_category_meta_prior(name, members, options));
  }
  return out;
}

double bias_of_estimator(const Eigen::MatrixXd& cov_matrix) {
  const auto n = cov_matrix.rows();
  if (n != cov_matrix.cols()) {
    throw ConfigError("bias_of_estimator: covariance matrix must be square");
  }
  if (n < 2) {
    throw ConfigError("bias_of_estimator: needs at least 2 features");
  }
  const double scale = cov_matrix.cwiseAbs().maxCoeff();
  const double tol = 1e-9 * std::max(1.0, scale);
  if (!cov_matrix.isApprox(cov_matrix.transpose(), 0.0) &&
      (cov_matrix - cov_matrix.transpose()).cwiseAbs().maxCoeff() > tol) {
    throw ConfigError("bias_of_estimator: covariance matrix is not symmetric");
  }
  const double off_diagonal_sum = cov_matrix.sum() - cov_matrix.trace();
  const double nk = static_cast<double>(n);
  return -off_diagonal_sum / (nk * (nk - 1.0));
}

BootstrapResult bootstrap_until_viable(
    const PriorConfig& model_prior, std::span<const LabeledExample> batch,
    const BootstrapConfig& config, const CategoryMap& categories,
    const std::vector<std::string>& which, bool zero_mean,
    const std::vector<bool>* retained) {
  if (batch.empty()) {
    throw ConfigError("bootstrap_until_viable: empty batch");
  }
  if (config.max_epochs < 1) {
    throw ConfigError("bootstrap_until_viable: max_epochs must be >= 1");
  }
  const std::size_t epoch_size =
      config.epoch_size > 0 ? config.epoch_size : batch.size();

  MetaPriorEstimateOptions est_options;
  est_options.zero_mean = zero_mean;
  est_options.min_tau_sq = config.min_tau_sq;

  Rng rng = make_rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick(0, batch.size() - 1);

  BootstrapResult result{BlipModel(categories, model_prior), {}, 0, {}};
  std::vector<std::size_t> ids;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    ids.clear();
    if (config.resample) {
      ids.reserve(epoch_size);
      for (std::size_t j = 0; j < epoch_size; ++j) ids.push_back(pick(rng));
    } else {
      ids.resize(batch.size());
      std::iota(ids.begin(), ids.end(), std::size_t{0});
      std::shuffle(ids.begin(), ids.end(), rng);
    }
    for (std::size_t id : ids) result.model.update(batch[id]);
    result.epoch_example_ids.push_back(ids);
    result.epochs_used = epoch;

    result.estimates = estimate_meta_prior(result.model.posteriors(),
                                           categories, which, est_options,
                                           retained);
    const bool viable =
        std::none_of(result.estimates.begin(), result.estimates.end(),
                     [](const CategoryMetaPrior& m) { return m.degenerate; });
    if (viable) return result;
  }
  throw InsufficientTrafficError(
      "insufficient traffic: no viable meta-prior after " +
          std::to_string(config.max_epochs) + " epoch(s)",
      result.estimates);
}

}  // namespace metaprior
