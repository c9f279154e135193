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

#include <cmath>
#include <random>
#include <vector>

#include "metaprior/errors.hpp"
#include "metaprior/feature_space.hpp"
#include "metaprior/meta_prior.hpp"
#include "metaprior/probit.hpp"

using namespace metaprior;

namespace {

std::vector<WeightPosterior> posteriors_of(std::vector<double> means,
                                           std::vector<double> variances) {
  std::vector<WeightPosterior> out(means.size());
  for (std::size_t i = 0; i < means.size(); ++i) {
    out[i] = {means[i], variances[i]};
  }
  return out;
}

}  // namespace

TEST_CASE("estimator on hand-checked inputs") {
  MetaPriorEstimateOptions zero_mean;
  zero_mean.zero_mean = true;

  SUBCASE("untrained default posteriors are degenerate") {
    const auto m = estimate_category_meta_prior(
        "first_order", posteriors_of({0, 0, 0}, {1, 1, 1}), zero_mean);
    CHECK(m.tau_sq_hat == doctest::Approx(-1.0));
    CHECK(m.degenerate);
    CHECK(m.n_features == 3);
  }

  SUBCASE("zero-mean direct evaluation") {
    // (1 + 1 + 4)/3 - 0.5 = 1.5
    const auto m = estimate_category_meta_prior(
        "k", posteriors_of({1, -1, 2}, {0.5, 0.5, 0.5}), zero_mean);
    CHECK(m.tau_sq_hat == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(m.nu_hat == 0.0);
    CHECK_FALSE(m.degenerate);
  }

  SUBCASE("with-mean hand oracle") {
    // sample variance of (1,2,3) is 1.0, mean noise 0.1, nu = 2.
    MetaPriorEstimateOptions with_mean;
    with_mean.zero_mean = false;
    const auto m = estimate_category_meta_prior(
        "k", posteriors_of({1, 2, 3}, {0.1, 0.1, 0.1}), with_mean);
    CHECK(m.tau_sq_hat == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(m.nu_hat == doctest::Approx(2.0));
  }

  SUBCASE("too few features names the category") {
    MetaPriorEstimateOptions with_mean;
    with_mean.zero_mean = false;
    CHECK_THROWS_WITH_AS(
        estimate_category_meta_prior("second_order",
                                     posteriors_of({1.0}, {0.1}), with_mean),
        doctest::Contains("second_order"), ConfigError);
    CHECK_THROWS_AS(
        estimate_category_meta_prior("k", {}, zero_mean), ConfigError);
  }
}

TEST_CASE("with-mean estimator is shift invariant") {
  MetaPriorEstimateOptions with_mean;
  with_mean.zero_mean = false;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> means(12), vars(12, 0.2);
  for (auto& m : means) m = normal(rng);

  const auto base =
      estimate_category_meta_prior("k", posteriors_of(means, vars), with_mean);
  for (auto& m : means) m += 7.25;
  const auto shifted =
      estimate_category_meta_prior("k", posteriors_of(means, vars), with_mean);
  CHECK(shifted.tau_sq_hat ==
        doctest::Approx(base.tau_sq_hat).epsilon(1e-10));
  CHECK(shifted.nu_hat == doctest::Approx(base.nu_hat + 7.25));
}

TEST_CASE("bias_of_estimator closed forms") {
  SUBCASE("diagonal covariance is unbiased") {
    Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(5, 5) * 0.3;
    CHECK(bias_of_estimator(cov) == doctest::Approx(0.0));
  }
  SUBCASE("two features with covariance 0.3") {
    Eigen::MatrixXd cov(2, 2);
    cov << 1.0, 0.3, 0.3, 1.0;
    CHECK(bias_of_estimator(cov) == doctest::Approx(-0.3).epsilon(1e-12));
  }
  SUBCASE("perfectly correlated trio loses the full variance") {
    const double s2 = 0.7;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(3, 3, s2);
    CHECK(bias_of_estimator(cov) == doctest::Approx(-s2).epsilon(1e-12));
  }
  SUBCASE("asymmetric input is rejected") {
    Eigen::MatrixXd cov(2, 2);
    cov << 1.0, 0.3, 0.1, 1.0;
    CHECK_THROWS_AS(bias_of_estimator(cov), ConfigError);
  }
  SUBCASE("scalar input is rejected") {
    CHECK_THROWS_AS(bias_of_estimator(Eigen::MatrixXd::Identity(1, 1)),
                    ConfigError);
  }
}

TEST_CASE("estimator is unbiased under independent noise (Monte Carlo)") {
  // mu_i ~ N(0, tau^2), mu~_i ~ N(mu_i, sigma_i^2) with known sigma_i^2.
  const double tau_sq = 0.5;
  const std::size_t n_features = 50;
  const std::size_t reps = 20000;
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> standard(0.0, 1.0);
  std::uniform_real_distribution<double> var_draw(0.05, 0.2);

  MetaPriorEstimateOptions with_mean;
  with_mean.zero_mean = false;

  double sum = 0.0, sum_sq = 0.0;
  std::vector<WeightPosterior> posteriors(n_features);
  for (std::size_t r = 0; r < reps; ++r) {
    for (auto& p : posteriors) {
      const double noise_var = var_draw(rng);
      const double mu = std::sqrt(tau_sq) * standard(rng);
      p.mean = mu + std::sqrt(noise_var) * standard(rng);
      p.variance = noise_var;
    }
    const double est =
        estimate_category_meta_prior("k", posteriors, with_mean).tau_sq_hat;
    sum += est;
    sum_sq += est * est;
  }
  const double mean = sum / reps;
  const double var = sum_sq / reps - mean * mean;
  const double se = std::sqrt(var / reps);
  CHECK(std::abs(mean - tau_sq) <= 3.0 * se);
}

TEST_CASE("bias formula predicts the equicorrelated-noise bias") {
  const double tau_sq = 0.5;
  const double rho_cov = 0.1;   // shared off-diagonal covariance
  const double noise_var = 0.2;
  const std::size_t n_features = 10;
  const std::size_t reps = 20000;

  Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(n_features, n_features,
                                                  rho_cov);
  cov.diagonal().setConstant(noise_var);
  const double predicted = bias_of_estimator(cov);
  CHECK(predicted == doctest::Approx(-rho_cov).epsilon(1e-12));

  std::mt19937_64 rng(77);
  std::normal_distribution<double> standard(0.0, 1.0);
  MetaPriorEstimateOptions with_mean;
  with_mean.zero_mean = false;

  double sum = 0.0, sum_sq = 0.0;
  std::vector<WeightPosterior> posteriors(n_features);
  for (std::size_t r = 0; r < reps; ++r) {
    const double shared = std::sqrt(rho_cov) * standard(rng);
    for (auto& p : posteriors) {
      const double mu = std::sqrt(tau_sq) * standard(rng);
      p.mean = mu + shared + std::sqrt(noise_var - rho_cov) * standard(rng);
      p.variance = noise_var;
    }
    const double est =
        estimate_category_meta_prior("k", posteriors, with_mean).tau_sq_hat;
    sum += est;
    sum_sq += est * est;
  }
  const double mean = sum / reps;
  const double se = std::sqrt((sum_sq / reps - mean * mean) / reps);
  CHECK(std::abs((mean - tau_sq) - predicted) <= 3.0 * se);
}

TEST_CASE("estimation error shrinks with the category size") {
  const double tau_sq = 0.5;
  std::mt19937_64 rng(31);
  std::normal_distribution<double> standard(0.0, 1.0);
  MetaPriorEstimateOptions zero_mean;

  auto median_abs_error = [&](std::size_t n) {
    std::vector<double> errors;
    std::vector<WeightPosterior> posteriors(n);
    for (int rep = 0; rep < 50; ++rep) {
      for (auto& p : posteriors) {
        const double mu = std::sqrt(tau_sq) * standard(rng);
        p.mean = mu + std::sqrt(0.1) * standard(rng);
        p.variance = 0.1;
      }
      errors.push_back(std::abs(
          estimate_category_meta_prior("k", posteriors, zero_mean).tau_sq_hat -
          tau_sq));
    }
    std::nth_element(errors.begin(), errors.begin() + errors.size() / 2,
                     errors.end());
    return errors[errors.size() / 2];
  };

  const double e10 = median_abs_error(10);
  const double e100 = median_abs_error(100);
  const double e1000 = median_abs_error(1000);
  CHECK(e100 < e10);
  CHECK(e1000 < e100);
}

TEST_CASE("bootstrap_until_viable") {
  CategoryMap map;
  map.names = {kBiasCategory, kFirstOrderCategory, kSecondOrderCategory};
  // bias + 4 first-order + 4 second-order features
  map.of_feature = {0, 1, 1, 1, 1, 2, 2, 2, 2};
  const std::vector<std::string> groups = {kFirstOrderCategory,
                                           kSecondOrderCategory};

  // Traffic with strong, distinguishable effects.
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::vector<double> truth = {0.1, 1.4, -1.2, 0.9,
                                     -1.0, 0.3, -0.2, 0.25, -0.3};
  std::vector<LabeledExample> batch;
  for (int i = 0; i < 1500; ++i) {
    SparseVector x;
    double score = 0.0;
    x.push_back(0, 1.0);
    score += truth[0];
    const int first = 1 + static_cast<int>(unit(rng) * 4.0);
    const int second = 5 + static_cast<int>(unit(rng) * 4.0);
    x.push_back(first, 1.0);
    x.push_back(second, 1.0);
    score += truth[first] + truth[second];
    const double z = unit(rng);
    batch.push_back(
        {x, z < 0.5 * std::erfc(-score / std::sqrt(2.0)) ? std::int8_t{1}
                                                         : std::int8_t{-1}});
  }

  BootstrapConfig config;
  config.seed = 99;
  config.max_epochs = 12;

  SUBCASE("stops at the first viable epoch") {
    const auto result = bootstrap_until_viable(PriorConfig{}, batch, config,
                                               map, groups);
    CHECK(result.epochs_used >= 1);
    CHECK(result.epochs_used <= config.max_epochs);
    for (const auto& m : result.estimates) {
      CHECK(m.tau_sq_hat > config.min_tau_sq);
      CHECK_FALSE(m.degenerate);
    }
    CHECK(result.epoch_example_ids.size() == result.epochs_used);
  }

  SUBCASE("deterministic under a fixed seed") {
    const auto a = bootstrap_until_viable(PriorConfig{}, batch, config, map,
                                          groups);
    const auto b = bootstrap_until_viable(PriorConfig{}, batch, config, map,
                                          groups);
    CHECK(a.epochs_used == b.epochs_used);
    REQUIRE(a.estimates.size() == b.estimates.size());
    for (std::size_t i = 0; i < a.estimates.size(); ++i) {
      CHECK(a.estimates[i].tau_sq_hat == b.estimates[i].tau_sq_hat);
    }
    CHECK(a.epoch_example_ids == b.epoch_example_ids);
  }

  SUBCASE("tiny uninformative batch exhausts max_epochs") {
    BootstrapConfig tight = config;
    tight.max_epochs = 3;
    std::vector<LabeledExample> tiny(batch.begin(), batch.begin() + 3);
    CHECK_THROWS_AS(
        bootstrap_until_viable(PriorConfig{}, tiny, tight, map, groups),
        InsufficientTrafficError);
    try {
      bootstrap_until_viable(PriorConfig{}, tiny, tight, map, groups);
    } catch (const InsufficientTrafficError& e) {
      CHECK_FALSE(e.last_estimates.empty());
    }
  }

  SUBCASE("empty batch is rejected") {
    CHECK_THROWS_AS(
        bootstrap_until_viable(PriorConfig{}, {}, config, map, groups),
        ConfigError);
  }

  SUBCASE("plain repetition also reaches viability") {
    BootstrapConfig plain = config;
    plain.resample = false;
    const auto result =
        bootstrap_until_viable(PriorConfig{}, batch, plain, map, groups);
    for (const auto& epoch : result.epoch_example_ids) {
      CHECK(epoch.size() == batch.size());  // every example exactly once
    }
  }
}
