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

#ifndef METAPRIOR_REGRET_BOUND_HPP_
#define METAPRIOR_REGRET_BOUND_HPP_

#include <optional>

namespace metaprior {

// Parameters of the high-probability cumulative-regret upper bound for the
// probit-link Thompson-sampling GLM bandit with a hierarchical
// N(0, tau_k^2) prior.
struct RegretBoundParams {
  int d = 1;            // feature dimension
  double horizon = 1;   // T
  double weight_norm_bound = 1.0;  // S, bound on ||mu*||
  double subgaussian = 0.5;        // R; binary rewards give 1/2
  double lambda = 1.0;             // regularization parameter
  double delta = 0.05;             // failure probability
  double k_phi = 0.39894228040143267794;  // Lipschitz constant of Phi
  std::optional<double> c_phi;  // inf of Phi'; defaults to norm_pdf(S)
  double tau_min = 1.0;
  double tau_max = 1.0;
};

struct RegretBoundTerms {
  double anti_concentration_p = 0.0;  // p = exp(1/2 - 1/tau_min^2)/(4 sqrt(pi))
  double concentration_c = 0.0;       // c  = 2 tau_max^2
  double concentration_c_prime = 0.0; // c' = 2
  double beta = 0.0;                  // beta_T(delta') with delta' = delta/(4T)
  double gamma = 0.0;                 // beta * sqrt(c d log(c' d / delta'))
  double bound = 0.0;                 // full right-hand side
};

// Evaluates the bound:
//
//   (k_phi/c_phi) (beta + gamma (1 + 2/p)) sqrt(2 T d log(1 + T/lambda))
//     + (2 k_phi gamma)/(p c_phi) sqrt((8T/lambda) log(4/delta)),
//
// with beta_t(delta) = R sqrt(2 log((lambda+t)^{d/2} lambda^{-d/2} / delta))
// + sqrt(lambda) S, everything at delta' = delta/(4T). Throws ConfigError on
// invalid parameters and when tau_min < 1e-6 (the bound blows up as
// tau_min -> 0).
RegretBoundTerms regret_bound(const RegretBoundParams& params);

}  // namespace metaprior

#endif  // METAPRIOR_REGRET_BOUND_HPP_
