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

#include "metaprior/regret_bound.hpp"

#include <cmath>

#include "metaprior/errors.hpp"
#include "metaprior/math.hpp"

namespace metaprior {

RegretBoundTerms regret_bound(const RegretBoundParams& params) {
  if (params.d < 1) throw ConfigError("regret_bound: d must be >= 1");
  if (params.horizon < 1) throw ConfigError("regret_bound: T must be >= 1");
  if (params.delta <= 0.0 || params.delta >= 1.0) {
    throw ConfigError("regret_bound: delta must lie in (0, 1)");
  }
  if (params.lambda <= 0.0) {
    throw ConfigError("regret_bound: lambda must be > 0");
  }
  if (params.tau_min > params.tau_max) {
    throw ConfigError("regret_bound: tau_min must be <= tau_max");
  }
  if (params.tau_min < 1e-6) {
    throw ConfigError(
        "regret_bound: tau_min below 1e-6; the bound diverges as tau_min -> 0");
  }
  const double c_phi =
      params.c_phi.value_or(math::norm_pdf(params.weight_norm_bound));
  if (!(c_phi > 0.0)) throw ConfigError("regret_bound: c_phi must be > 0");
  if (!(params.k_phi > 0.0)) throw ConfigError("regret_bound: k_phi must be > 0");
  if (params.subgaussian < 0.0) {
    throw ConfigError("regret_bound: R must be >= 0");
  }

  const double tau_min_sq = params.tau_min * params.tau_min;
  const double tau_max_sq = params.tau_max * params.tau_max;
  const double T = params.horizon;
  const double d = static_cast<double>(params.d);
  const double lambda = params.lambda;

  RegretBoundTerms terms;
  terms.anti_concentration_p =
      std::exp(0.5 - 1.0 / tau_min_sq) / (4.0 * math::kSqrtPi);
  terms.concentration_c = 2.0 * tau_max_sq;
  terms.concentration_c_prime = 2.0;

  const double delta_prime = params.delta / (4.0 * T);
  // log((lambda+T)^{d/2} lambda^{-d/2} / delta'), kept in log space.
  const double log_ratio = 0.5 * d * (std::log(lambda + T) - std::log(lambda)) -
                           std::log(delta_prime);
  terms.beta = params.subgaussian * std::sqrt(2.0 * log_ratio) +
               std::sqrt(lambda) * params.weight_norm_bound;
  terms.gamma =
      terms.beta * std::sqrt(terms.concentration_c * d *
                             std::log(terms.concentration_c_prime * d /
                                      delta_prime));

  const double p = terms.anti_concentration_p;
  const double exploration = std::sqrt(2.0 * T * d * std::log(1.0 + T / lambda));
  terms.bound =
      (params.k_phi / c_phi) * (terms.beta + terms.gamma * (1.0 + 2.0 / p)) *
          exploration +
      (2.0 * params.k_phi * terms.gamma) / (p * c_phi) *
          std::sqrt(8.0 * T / lambda * std::log(4.0 / params.delta));
  return terms;
}

}  // namespace metaprior
