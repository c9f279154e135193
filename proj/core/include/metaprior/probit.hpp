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

#ifndef METAPRIOR_PROBIT_HPP_
#define METAPRIOR_PROBIT_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace metaprior {

// Per-feature Gaussian belief. Variance is strictly positive and, between
// prior resets, never exceeds the value it was initialized with.
struct WeightPosterior {
  double mean = 0.0;
  double variance = 1.0;
};

struct GaussianPrior {
  double mean = 0.0;
  double variance = 1.0;
};

// Hierarchical prior: one Gaussian per feature category. Categories not
// listed fall back to `default_prior` when it is set (the non-informative
// N(0, 1) out of the box); clearing the default makes coverage mandatory.
struct PriorConfig {
  std::map<std::string, GaussianPrior> per_category;
  std::optional<GaussianPrior> default_prior = GaussianPrior{0.0, 1.0};

  // Throws ModelError naming the category when it is absent and no default
  // is available.
  const GaussianPrior& for_category(const std::string& category) const;
};

// Sparse feature vector: parallel index/value arrays, indices strictly
// increasing. Binary encodings carry value 1 per active index.
struct SparseVector {
  std::vector<std::int32_t> indices;
  std::vector<double> values;

  std::size_t nnz() const { return indices.size(); }
  void push_back(std::int32_t index, double value) {
    indices.push_back(index);
    values.push_back(value);
  }
};

struct LabeledExample {
  SparseVector x;
  std::int8_t label = 1;  // in {-1, +1}
};

enum class PredictionMode {
  kMarginalized,  // Phi(m / sqrt(beta^2 + s)), integrating posterior variance
  kPlugIn,        // Phi(m / beta)
};

// Maps every feature index to a named category ("bias", "first_order", ...).
struct CategoryMap {
  std::vector<std::string> names;          // category id -> name
  std::vector<std::uint32_t> of_feature;   // feature index -> category id

  std::size_t dimension() const { return of_feature.size(); }
  std::uint32_t id_of(const std::string& name) const;  // throws if unknown
};

// Bayesian linear probit classifier with independent Gaussian weight
// posteriors, trained by single-pass assumed-density filtering.
//
// P(y | x) = Phi(y * mu~' x / beta) with beta fixed to 1; each observation
// moment-matches the exact tilted posterior back onto the diagonal Gaussian
// family. Active-feature variances shrink monotonically; inactive features
// are untouched.
class BlipModel {
 public:
  BlipModel(CategoryMap categories, const PriorConfig& prior);

  std::size_t dimension() const { return posteriors_.size(); }
  const std::vector<WeightPosterior>& posteriors() const { return posteriors_; }
  const CategoryMap& categories() const { return categories_; }
  const PriorConfig& prior_config() const { return prior_; }
  double steepness() const { return steepness_; }

  PredictionMode prediction_mode() const { return mode_; }
  void set_prediction_mode(PredictionMode mode) { mode_ = mode; }

  // Probability of label +1 for the given features. Throws ModelError on an
  // out-of-range index.
  double predict(const SparseVector& x) const;
  double predict(const SparseVector& x, PredictionMode mode) const;

  // One ADF step. Posterior means move toward explaining the label; active
  // variances shrink by a factor in (0, 1]. Throws ModelError if the total
  // variance term underflows or any variance crosses the hard floor.
  void update(const LabeledExample& example);

  // Sequential update over the batch in input order. Returns false (and
  // leaves the model untouched) for an empty batch.
  bool train_batch(std::span<const LabeledExample> batch);

  // Discards all training history and re-initializes every posterior from
  // its category's entry in `prior`. Throws ModelError naming the category
  // if one used by this model is missing and `prior` has no default.
  void reset_with_prior(const PriorConfig& prior);

  // Replaces the posterior state wholesale (loading a saved model,
  // injecting a degenerate zero-variance state for diagnostics). Variances
  // must be >= 0; a zero-variance feature can predict but not train.
  void set_posteriors(std::vector<WeightPosterior> posteriors);

  // Variances below this are treated as numerically degenerate.
  static constexpr double kVarianceFloor = 1e-12;

 private:
  std::vector<WeightPosterior> posteriors_;
  CategoryMap categories_;
  PriorConfig prior_;     // as applied at the last reset
  double steepness_ = 1.0;
  PredictionMode mode_ = PredictionMode::kMarginalized;
};

}  // namespace metaprior

#endif  // METAPRIOR_PROBIT_HPP_
