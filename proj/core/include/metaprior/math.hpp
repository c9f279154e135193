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

#ifndef METAPRIOR_MATH_HPP_
#define METAPRIOR_MATH_HPP_

namespace metaprior::math {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;  // 1/sqrt(2*pi)
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kSqrtPi = 1.77245385090551602730;

// Standard Gaussian density.
double norm_pdf(double z);

// Standard Gaussian CDF. Throws ModelError on non-finite input.
double probit_cdf(double z);

// Scaled complementary error function exp(x^2) * erfc(x), for x >= 2.
// Evaluated with the Laplace continued fraction.
double erfcx_tail(double x);

// Inverse Mills ratio norm_pdf(t) / probit_cdf(t). Direct evaluation for
// t >= -6; the erfcx form below that, where the naive ratio degrades to 0/0.
double inverse_mills(double t);

// Exact one-sided binomial sign-test p-value: P(Bin(n, 1/2) >= k).
double sign_test_p_value(int successes, int trials);

// Two-sided Student-t p-value with df degrees of freedom.
double students_t_two_sided_p(double t, double df);

// Two-tailed two-proportion z-test with pooled variance. Returns the p-value
// for counts (successes1 of n1) vs (successes2 of n2).
double proportion_z_test_p(long long successes1, long long n1,
                           long long successes2, long long n2);

}  // namespace metaprior::math

#endif  // METAPRIOR_MATH_HPP_
