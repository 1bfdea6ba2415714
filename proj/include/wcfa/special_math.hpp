// Copyright 2026 The wcfa Authors
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

#ifndef WCFA_SPECIAL_MATH_HPP_
#define WCFA_SPECIAL_MATH_HPP_

#include <vector>

#include "wcfa/rng.hpp"

namespace wcfa {

/// Gamma distribution with shape `alpha` and rate `beta`.
struct GammaParams {
  double alpha = 1.0;
  double beta = 1.0;
  void validate() const;
  double mean() const { return alpha / beta; }
  /// E[log x] = psi(alpha) - log(beta).
  double mean_log() const;
};

/// Inverse-gamma distribution with shape `a` and scale `b`; 1/x ~ Gamma(a, b).
struct InvGammaParams {
  double a = 1.0;
  double b = 1.0;
  void validate() const;
  /// E[1/x] = a / b.
  double mean_inv() const { return a / b; }
  /// E[log x] = log(b) - psi(a).
  double mean_log() const;
};

struct GaussianParams {
  double mean = 0.0;
  double variance = 1.0;
  void validate() const;
};

double normal_cdf(double x, GaussianParams p);
/// Upper tail 1 - Phi(x) evaluated without cancellation.
double normal_sf(double x, GaussianParams p);
/// Standard normal quantile for p in (0, 1).
double normal_quantile(double p);

double digamma(double x);
double trigamma(double x);
/// psi(x) - log(x); stays accurate for large x where both terms are close.
double digamma_minus_log(double x);
double log_gamma(double x);

double sample_normal(GaussianParams p, RngStream& rng);
/// Marsaglia-Tsang squeeze/rejection; shapes below one use the
/// Gamma(alpha + 1) * U^(1/alpha) boost.
double sample_gamma(GammaParams p, RngStream& rng);
double sample_inv_gamma(InvGammaParams p, RngStream& rng);

/// Solves psi(alpha) - log(alpha) = c for c < 0 by safeguarded Newton in
/// log(alpha) with bisection fallback. Residual tolerance is 1e-12 relative
/// to |c|, at most 200 iterations; failure throws NumericError carrying the
/// iterate trace.
double solve_digamma_log_gap(double c);

/// Average per-item objective maximised by the gamma M-step:
///   alpha log beta - log Gamma(alpha) + (alpha - 1) mean_log_x - beta mean_x.
double gamma_fit_objective(GammaParams p, double mean_x, double mean_log_x);
/// Average per-item objective for the inverse-gamma M-step:
///   a log b - log Gamma(a) - (a + 1) mean_log_x - b mean_inv_x.
double inv_gamma_fit_objective(InvGammaParams p, double mean_inv_x,
                               double mean_log_x);

/// Gamma(alpha, beta) maximizing the expected log density given E[x] and
/// E[log x]. Requires mean_log_x < log(mean_x).
GammaParams fit_gamma_from_expectations(double mean_x, double mean_log_x);
/// InvGamma(a, b) maximizing the expected log density given E[1/x] and
/// E[log x]. Requires -mean_log_x < log(mean_inv_x).
InvGammaParams fit_inv_gamma_from_expectations(double mean_inv_x,
                                               double mean_log_x);

}  // namespace wcfa

#endif  // WCFA_SPECIAL_MATH_HPP_
