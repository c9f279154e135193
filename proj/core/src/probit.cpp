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

#include "metaprior/probit.hpp"

#include <cmath>
#include <stdexcept>

#include "metaprior/errors.hpp"
#include "metaprior/math.hpp"

namespace metaprior {

const GaussianPrior& PriorConfig::for_category(const std::string& category) const {
  auto it = per_category.find(category);
  if (it != per_category.end()) return it->second;
  if (default_prior.has_value()) return *default_prior;
  throw ModelError("category missing from prior: " + category);
}

std::uint32_t CategoryMap::id_of(const std::string& name) const {
  for (std::uint32_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw ConfigError("unknown feature category: " + name);
}

BlipModel::BlipModel(CategoryMap categories, const PriorConfig& prior)
    : categories_(std::move(categories)) {
  if (categories_.of_feature.empty()) {
    throw ConfigError("BlipModel: empty feature space");
  }
  for (auto id : categories_.of_feature) {
    if (id >= categories_.names.size()) {
      throw ConfigError("BlipModel: category id out of range");
    }
  }
  posteriors_.resize(categories_.of_feature.size());
  reset_with_prior(prior);
}

namespace {

struct Summary {
  double mean_score = 0.0;      // sum_i mu_i x_i
  double variance_score = 0.0;  // sum_i sigma_i^2 x_i^2
};

Summary summarize(const std::vector<WeightPosterior>& posteriors,
                  const SparseVector& x) {
  if (x.indices.size() != x.values.size()) {
    throw ModelError("sparse vector index/value length mismatch");
  }
  Summary s;
  const auto dim = static_cast<std::int64_t>(posteriors.size());
  for (std::size_t k = 0; k < x.indices.size(); ++k) {
    const std::int32_t i = x.indices[k];
    if (i < 0 || i >= dim) {
      throw ModelError("feature index " + std::to_string(i) +
                       " out of range for dimension " + std::to_string(dim));
    }
    const double v = x.values[k];
    s.mean_score += posteriors[i].mean * v;
    s.variance_score += posteriors[i].variance * v * v;
  }
  return s;
}

}  // namespace

double BlipModel::predict(const SparseVector& x) const {
  return predict(x, mode_);
}

double BlipModel::predict(const SparseVector& x, PredictionMode mode) const {
  const Summary s = summarize(posteriors_, x);
  const double beta_sq = steepness_ * steepness_;
  if (mode == PredictionMode::kPlugIn) {
    return math::probit_cdf(s.mean_score / steepness_);
  }
  return math::probit_cdf(s.mean_score / std::sqrt(beta_sq + s.variance_score));
}

void BlipModel::update(const LabeledExample& example) {
  if (example.label != 1 && example.label != -1) {
    throw ModelError("label must be -1 or +1");
  }
  const Summary s = summarize(posteriors_, example.x);
  const double total_variance = steepness_ * steepness_ + s.variance_score;
  if (!(total_variance > kVarianceFloor)) {
    throw ModelError("total variance term underflow in ADF update");
  }
  const double denom = std::sqrt(total_variance);
  const double y = static_cast<double>(example.label);
  const double t = y * s.mean_score / denom;
  const double v = math::inverse_mills(t);
  const double w = v * (v + t);

  for (std::size_t k = 0; k < example.x.indices.size(); ++k) {
    const std::int32_t i = example.x.indices[k];
    const double xi = example.x.values[k];
    if (xi == 0.0) continue;
    WeightPosterior& p = posteriors_[i];
    p.mean += y * xi * p.variance * v / denom;
    p.variance *= 1.0 - xi * xi * p.variance * w / total_variance;
    if (!(p.variance > kVarianceFloor)) {
      throw ModelError("posterior variance underflow at feature " +
                       std::to_string(i));
    }
  }
}

bool BlipModel::train_batch(std::span<const LabeledExample> batch) {
  if (batch.empty()) return false;
  for (const auto& example : batch) update(example);
  return true;
}

void BlipModel::set_posteriors(std::vector<WeightPosterior> posteriors) {
  if (posteriors.size() != posteriors_.size()) {
    throw ModelError("set_posteriors: dimension mismatch");
  }
  for (const auto& p : posteriors) {
    if (!std::isfinite(p.mean) || !(p.variance >= 0.0)) {
      throw ModelError("set_posteriors: invalid posterior state");
    }
  }
  posteriors_ = std::move(posteriors);
}

void BlipModel::reset_with_prior(const PriorConfig& prior) {
  // Validate before mutating anything.
  for (std::uint32_t id = 0; id < categories_.names.size(); ++id) {
    const GaussianPrior& g = prior.for_category(categories_.names[id]);
    if (!(g.variance > 0.0) || !std::isfinite(g.variance) ||
        !std::isfinite(g.mean)) {
      throw ModelError("invalid prior for category '" + categories_.names[id] +
                       "': variance must be finite and > 0");
    }
  }
  for (std::size_t i = 0; i < posteriors_.size(); ++i) {
    const std::string& name = categories_.names[categories_.of_feature[i]];
    const GaussianPrior& g = prior.for_category(name);
    posteriors_[i].mean = g.mean;
    posteriors_[i].variance = g.variance;
  }
  prior_ = prior;
}

}  // namespace metaprior
