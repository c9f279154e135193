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

#include "metaprior/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "metaprior/errors.hpp"
#include "metaprior/rng.hpp"

namespace metaprior {

Eigen::VectorXd ridge_regression(const Eigen::MatrixXd& design,
                                 const Eigen::VectorXd& response,
                                 double penalty) {
  if (design.rows() != response.size()) {
    throw ConfigError("ridge: design rows do not match response length");
  }
  if (penalty < 0.0) {
    throw ConfigError("ridge: penalty must be >= 0");
  }
  Eigen::MatrixXd gram = design.transpose() * design;
  gram.diagonal().array() += penalty;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  const double max_pivot = ldlt.vectorD().cwiseAbs().maxCoeff();
  const double min_pivot = ldlt.vectorD().cwiseAbs().minCoeff();
  if (ldlt.info() != Eigen::Success ||
      min_pivot <= 1e-12 * std::max(1.0, max_pivot)) {
    throw ModelError(
        "ridge system is singular; try a larger ridge_penalty");
  }
  Eigen::VectorXd w = ldlt.solve(design.transpose() * response);
  if (!w.allFinite()) {
    throw ModelError(
        "ridge solve produced non-finite coefficients; try a larger "
        "ridge_penalty");
  }
  return w;
}

Eigen::VectorXd lasso_coordinate_descent(const Eigen::MatrixXd& design,
                                         const Eigen::VectorXd& response,
                                         double lambda,
                                         const Eigen::VectorXd& zeta,
                                         int max_sweeps, double tolerance) {
  const auto n = design.rows();
  const auto d = design.cols();
  if (response.size() != n || zeta.size() != d) {
    throw ConfigError("lasso: dimension mismatch");
  }
  if (lambda < 0.0) {
    throw ConfigError("lasso: lambda must be >= 0");
  }

  // Rescaled problem: columns x~_j = x_j / zeta_j, uniform penalty lambda.
  // Columns with non-finite or zero-division zeta stay out entirely.
  Eigen::MatrixXd scaled(n, d);
  Eigen::VectorXd inv_zeta(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double z = zeta[j];
    if (!std::isfinite(z) || z <= 0.0 || !std::isfinite(1.0 / z)) {
      inv_zeta[j] = 0.0;
    } else {
      inv_zeta[j] = 1.0 / z;
    }
    scaled.col(j) = design.col(j) * inv_zeta[j];
  }

  Eigen::VectorXd norms(d);
  for (Eigen::Index j = 0; j < d; ++j) norms[j] = scaled.col(j).squaredNorm();

  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);  // rescaled coefficients
  Eigen::VectorXd residual = response;
  const double threshold = 0.5 * lambda;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (norms[j] <= 0.0) continue;
      const double rho = scaled.col(j).dot(residual) + norms[j] * w[j];
      double next = 0.0;
      if (rho > threshold) {
        next = (rho - threshold) / norms[j];
      } else if (rho < -threshold) {
        next = (rho + threshold) / norms[j];
      }
      const double delta = next - w[j];
      if (delta != 0.0) {
        residual -= scaled.col(j) * delta;
        w[j] = next;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    if (max_delta < tolerance) break;
  }
  return w.cwiseProduct(inv_zeta);  // back to the original scale
}

namespace {

// Stratified round-robin fold assignment by response sign, seeded.
std::vector<int> assign_folds(const Eigen::VectorXd& labels, int folds,
                              std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    (labels[i] > 0 ? pos : neg).push_back(static_cast<std::size_t>(i));
  }
  Rng rng = make_rng(derive_seed(seed, "lasso_cv_folds"));
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);
  std::vector<int> fold(labels.size(), 0);
  int next = 0;
  for (std::size_t i : pos) fold[i] = next++ % folds;
  for (std::size_t i : neg) fold[i] = next++ % folds;
  return fold;
}

Eigen::VectorXd adaptive_weights(const Eigen::VectorXd& initial, double gamma) {
  Eigen::VectorXd zeta(initial.size());
  for (Eigen::Index j = 0; j < initial.size(); ++j) {
    const double a = std::abs(initial[j]);
    zeta[j] = a > 0.0 ? 1.0 / std::pow(a, gamma)
                      : std::numeric_limits<double>::infinity();
  }
  return zeta;
}

}  // namespace

AdaptiveLassoResult adaptive_lasso_prune(
    const Eigen::MatrixXd& design, const Eigen::VectorXd& labels,
    const LassoConfig& config, const std::vector<std::string>& protect,
    const CategoryMap& categories, const std::vector<int>* fold_ids) {
  if (design.rows() != labels.size()) {
    throw ConfigError("adaptive lasso: design rows do not match label length");
  }
  if (static_cast<std::size_t>(design.cols()) != categories.dimension()) {
    throw ConfigError("adaptive lasso: category map does not match design");
  }
  if (config.cv_folds < 2) {
    throw ConfigError("adaptive lasso: cv_folds must be >= 2");
  }
  if (config.gamma <= 0.0) {
    throw ConfigError("adaptive lasso: gamma must be > 0");
  }
  if (config.lambda_grid.empty()) {
    throw ConfigError("adaptive lasso: empty lambda grid");
  }
  for (const auto& name : protect) categories.id_of(name);  // validate names

  const Eigen::VectorXd initial =
      ridge_regression(design, labels, config.ridge_penalty);
  const Eigen::VectorXd zeta = adaptive_weights(initial, config.gamma);

  std::vector<int> folds =
      fold_ids != nullptr ? *fold_ids
                          : assign_folds(labels, config.cv_folds, config.seed);
  if (folds.size() != static_cast<std::size_t>(design.rows())) {
    throw ConfigError("adaptive lasso: fold assignment length mismatch");
  }

  const std::size_t n_lambda = config.lambda_grid.size();
  std::vector<double> cv_sse(n_lambda, 0.0);
  std::vector<std::size_t> cv_count(n_lambda, 0);

  for (int f = 0; f < config.cv_folds; ++f) {
    std::vector<Eigen::Index> train_rows, valid_rows;
    for (Eigen::Index i = 0; i < design.rows(); ++i) {
      (folds[static_cast<std::size_t>(i)] == f ? valid_rows : train_rows)
          .push_back(i);
    }
    if (train_rows.empty() || valid_rows.empty()) continue;
    Eigen::MatrixXd x_train(train_rows.size(), design.cols());
    Eigen::VectorXd y_train(train_rows.size());
    for (std::size_t r = 0; r < train_rows.size(); ++r) {
      x_train.row(r) = design.row(train_rows[r]);
      y_train[r] = labels[train_rows[r]];
    }
    for (std::size_t li = 0; li < n_lambda; ++li) {
      const Eigen::VectorXd w = lasso_coordinate_descent(
          x_train, y_train, config.lambda_grid[li], zeta, config.max_sweeps,
          config.tolerance);
      for (Eigen::Index i : valid_rows) {
        const double err = labels[i] - design.row(i).dot(w);
        cv_sse[li] += err * err;
      }
      cv_count[li] += valid_rows.size();
    }
  }

  AdaptiveLassoResult result;
  result.cv_mse.resize(n_lambda);
  std::size_t best = 0;
  for (std::size_t li = 0; li < n_lambda; ++li) {
    result.cv_mse[li] =
        cv_count[li] > 0 ? cv_sse[li] / static_cast<double>(cv_count[li])
                         : std::numeric_limits<double>::infinity();
    if (result.cv_mse[li] < result.cv_mse[best]) best = li;
  }
  result.selected_lambda = config.lambda_grid[best];
  result.coefficients =
      lasso_coordinate_descent(design, labels, result.selected_lambda, zeta,
                               config.max_sweeps, config.tolerance);

  std::set<std::int32_t> keep;
  for (Eigen::Index j = 0; j < result.coefficients.size(); ++j) {
    if (result.coefficients[j] != 0.0) keep.insert(static_cast<std::int32_t>(j));
  }
  for (const auto& name : protect) {
    const std::uint32_t id = categories.id_of(name);
    for (std::size_t j = 0; j < categories.of_feature.size(); ++j) {
      if (categories.of_feature[j] == id) keep.insert(static_cast<std::int32_t>(j));
    }
  }
  result.retained.assign(keep.begin(), keep.end());
  return result;
}

}  // namespace metaprior
