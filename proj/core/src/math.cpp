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

#include "metaprior/math.hpp"

#include <cmath>
#include <cstdlib>

#include "metaprior/errors.hpp"

namespace metaprior::math {

double norm_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double probit_cdf(double z) {
  if (!std::isfinite(z)) {
    throw ModelError("probit_cdf: non-finite input");
  }
  return 0.5 * std::erfc(-z / kSqrt2);
}

double erfcx_tail(double x) {
  // sqrt(pi) * exp(x^2) * erfc(x) = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
  // with partial numerators n/2. Modified Lentz evaluation.
  const double tiny = 1e-300;
  double f = x;
  if (f == 0.0) f = tiny;
  double c = f;
  double d = 0.0;
  for (int n = 1; n < 300; ++n) {
    const double a = 0.5 * n;
    d = x + a * d;
    if (d == 0.0) d = tiny;
    c = x + a / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 / (kSqrtPi * f);
}

double inverse_mills(double t) {
  if (!std::isfinite(t)) {
    throw ModelError("inverse_mills: non-finite input");
  }
  if (t >= -6.0) {
    return norm_pdf(t) / probit_cdf(t);
  }
  // pdf(t)/cdf(t) = sqrt(2/pi) / erfcx(-t/sqrt(2)) once the shared
  // exp(-t^2/2) factor is cancelled.
  return 2.0 * kInvSqrt2Pi / erfcx_tail(-t / kSqrt2);
}

double sign_test_p_value(int successes, int trials) {
  if (trials <= 0 || successes < 0 || successes > trials) {
    throw ConfigError("sign_test_p_value: invalid counts");
  }
  // Sum the upper binomial tail in log space to stay exact for small n.
  double p = 0.0;
  for (int i = successes; i <= trials; ++i) {
    double log_c = std::lgamma(trials + 1.0) - std::lgamma(i + 1.0) -
                   std::lgamma(trials - i + 1.0);
    p += std::exp(log_c - trials * std::log(2.0));
  }
  return p > 1.0 ? 1.0 : p;
}

namespace {

// Regularized incomplete beta I_x(a, b) via the standard continued fraction.
double beta_cf(double a, double b, double x) {
  const double tiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-14) break;
  }
  return h;
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(a, b, x) / a;
  }
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

}  // namespace

double students_t_two_sided_p(double t, double df) {
  if (df <= 0.0) {
    throw ConfigError("students_t_two_sided_p: df must be positive");
  }
  if (!std::isfinite(t)) return 0.0;
  const double x = df / (df + t * t);
  return incomplete_beta(0.5 * df, 0.5, x);
}

double proportion_z_test_p(long long successes1, long long n1,
                           long long successes2, long long n2) {
  if (n1 <= 0 || n2 <= 0) {
    throw ConfigError("proportion_z_test_p: empty sample");
  }
  const double p1 = static_cast<double>(successes1) / n1;
  const double p2 = static_cast<double>(successes2) / n2;
  const double pooled = static_cast<double>(successes1 + successes2) / (n1 + n2);
  const double se =
      std::sqrt(pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2));
  if (se == 0.0) return 1.0;
  const double z = (p1 - p2) / se;
  return 2.0 * (1.0 - probit_cdf(std::abs(z)));
}

}  // namespace metaprior::math
