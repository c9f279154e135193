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

#ifndef METAPRIOR_LASSO_HPP_
#define METAPRIOR_LASSO_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "metaprior/probit.hpp"

namespace metaprior {

struct LassoConfig {
  std::vector<double> lambda_grid;
  int cv_folds = 5;
  double gamma = 1.0;          // adaptive exponent
  double ridge_penalty = 1.0;  // initial-estimator regularization
  std::uint64_t seed = 0;
  int max_sweeps = 1000;
  double tolerance = 1e-12;
};

// Ridge initial estimate (X'X + penalty*I)^-1 X'y. Throws ModelError
// suggesting a larger ridge_penalty when the system is singular.
Eigen::VectorXd ridge_regression(const Eigen::MatrixXd& design,
                                 const Eigen::VectorXd& response,
                                 double penalty);

// Cyclic coordinate descent for
//   min_w ||y - X w||^2 + lambda * sum_i zeta_i |w_i|
// run on the rescaled problem X~ = X diag(1/zeta). A non-finite zeta_i
// (all-zero column, zero initial estimate) forces w_i = 0.
Eigen::VectorXd lasso_coordinate_descent(const Eigen::MatrixXd& design,
                                         const Eigen::VectorXd& response,
                                         double lambda,
                                         const Eigen::VectorXd& zeta,
                                         int max_sweeps, double tolerance);

struct AdaptiveLassoResult {
  std::vector<std::int32_t> retained;  // sorted encoded indices
  Eigen::VectorXd coefficients;        // full-data refit at selected lambda
  double selected_lambda = 0.0;
  std::vector<double> cv_mse;          // one entry per lambda, grid order
};

// Adaptive lasso feature selection.
//
// Fits ridge to obtain initial estimates w^, sets adaptive weights
// zeta_i = 1/|w^_i|^gamma, solves the weighted lasso over config.lambda_grid
// by coordinate descent, and picks the lambda minimizing cv_folds-fold mean
// squared error (folds seeded and stratified by the sign of the response;
// pass `fold_ids` to pin the assignment explicitly). Returns all indices
// with nonzero refit coefficients, unioned with every index belonging to a
// protected category.
//
// `categories` describes the design's columns; `protect` lists category
// names whose columns are always retained.
AdaptiveLassoResult adaptive_lasso_prune(
    const Eigen::MatrixXd& design, const Eigen::VectorXd& labels,
    const LassoConfig& config, const std::vector<std::string>& protect,
    const CategoryMap& categories,
    const std::vector<int>* fold_ids = nullptr);

}  // namespace metaprior

#endif  // METAPRIOR_LASSO_HPP_
