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

#include "wcfa/special_math.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "wcfa/error.hpp"

namespace wcfa {
namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

double standard_score(double x, const GaussianParams& p) {
  p.validate();
  if (std::isnan(x)) throw DomainError("normal_cdf: x is NaN");
  return (x - p.mean) / std::sqrt(p.variance);
}

// Asymptotic tails, valid for x >= 10 (truncation error below 1e-14).
double digamma_minus_log_asymptotic(double x) {
  const double r = 1.0 / x;
  const double r2 = r * r;
  return -0.5 * r -
         r2 * (1.0 / 12 -
               r2 * (1.0 / 120 -
                     r2 * (1.0 / 252 - r2 * (1.0 / 240 - r2 * (1.0 / 132)))));
}

double trigamma_minus_inv_asymptotic(double x) {
  const double r = 1.0 / x;
  const double r2 = r * r;
  return r2 * (0.5 + r * (1.0 / 6 -
                          r2 * (1.0 / 30 -
                                r2 * (1.0 / 42 -
                                      r2 * (1.0 / 30 - r2 * (5.0 / 66))))));
}

constexpr double kAsymptoticCut = 10.0;

}  // namespace

void GammaParams::validate() const {
  if (!positive_finite(alpha) || !positive_finite(beta))
    throw DomainError("gamma parameters must be positive and finite");
}

double GammaParams::mean_log() const { return digamma(alpha) - std::log(beta); }

void InvGammaParams::validate() const {
  if (!positive_finite(a) || !positive_finite(b))
    throw DomainError("inverse-gamma parameters must be positive and finite");
}

double InvGammaParams::mean_log() const { return std::log(b) - digamma(a); }

void GaussianParams::validate() const {
  if (!std::isfinite(mean) || !positive_finite(variance))
    throw DomainError("gaussian parameters require finite mean and variance > 0");
}

double normal_cdf(double x, GaussianParams p) {
  const double z = standard_score(x, p);
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double normal_sf(double x, GaussianParams p) {
  const double z = standard_score(x, p);
  return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw DomainError("normal_quantile: p must lie in (0, 1)");
  // Acklam's rational approximation, then one Halley refinement step.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double digamma(double x) {
  if (!positive_finite(x)) throw DomainError("digamma: x must be positive");
  double shift = 0.0;
  while (x < kAsymptoticCut) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  return shift + std::log(x) + digamma_minus_log_asymptotic(x);
}

double trigamma(double x) {
  if (!positive_finite(x)) throw DomainError("trigamma: x must be positive");
  double shift = 0.0;
  while (x < kAsymptoticCut) {
    shift += 1.0 / (x * x);
    x += 1.0;
  }
  return shift + 1.0 / x + trigamma_minus_inv_asymptotic(x);
}

double digamma_minus_log(double x) {
  if (!positive_finite(x))
    throw DomainError("digamma_minus_log: x must be positive");
  if (x >= kAsymptoticCut) return digamma_minus_log_asymptotic(x);
  return digamma(x) - std::log(x);
}

double log_gamma(double x) {
  if (!positive_finite(x)) throw DomainError("log_gamma: x must be positive");
  return std::lgamma(x);
}

double sample_normal(GaussianParams p, RngStream& rng) {
  p.validate();
  return p.mean + std::sqrt(p.variance) * rng.standard_normal();
}

double sample_gamma(GammaParams p, RngStream& rng) {
  p.validate();
  double boost = 1.0;
  double shape = p.alpha;
  if (shape < 1.0) {
    boost = std::pow(rng.uniform(), 1.0 / shape);
    shape += 1.0;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = rng.standard_normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 ||
        std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      const double draw = boost * d * v / p.beta;
      return std::max(draw, std::numeric_limits<double>::min());
    }
  }
}

double sample_inv_gamma(InvGammaParams p, RngStream& rng) {
  p.validate();
  return 1.0 / sample_gamma(GammaParams{p.a, p.b}, rng);
}

double solve_digamma_log_gap(double c) {
  if (!(std::isfinite(c) && c < 0.0))
    throw DomainError("solve_digamma_log_gap: target must be negative and finite");
  constexpr int kMaxIterations = 200;
  constexpr double kResidualTol = 1e-12;

  // g(u) = h(e^u) - c with h = psi - log is strictly increasing in u.
  auto g = [c](double u) { return digamma_minus_log(std::exp(u)) - c; };

  // Minka's closed-form approximation as the starting point.
  const double s = -c;
  double u = std::log((3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) /
                      (12.0 * s));
  double lo = u, hi = u;
  while (g(lo) > 0.0) lo -= 2.0;
  while (g(hi) < 0.0) hi += 2.0;

  std::ostringstream trace;
  for (int it = 0; it < kMaxIterations; ++it) {
    const double gu = g(u);
    trace << " u=" << u << " g=" << gu;
    if (std::abs(gu) <= kResidualTol * std::abs(c)) return std::exp(u);
    if (gu < 0.0) lo = u; else hi = u;
    const double alpha = std::exp(u);
    const double slope = alpha >= kAsymptoticCut
                             ? alpha * trigamma_minus_inv_asymptotic(alpha)
                             : alpha * trigamma(alpha) - 1.0;
    double next = u - gu / slope;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (std::abs(next - u) <= 4.0 * std::numeric_limits<double>::epsilon() *
                                  std::max(1.0, std::abs(u)))
      return std::exp(next);
    u = next;
  }
  throw NumericError("solve_digamma_log_gap: no convergence for c=" +
                     std::to_string(c) + ";" + trace.str());
}

double gamma_fit_objective(GammaParams p, double mean_x, double mean_log_x) {
  return p.alpha * std::log(p.beta) - std::lgamma(p.alpha) +
         (p.alpha - 1.0) * mean_log_x - p.beta * mean_x;
}

double inv_gamma_fit_objective(InvGammaParams p, double mean_inv_x,
                               double mean_log_x) {
  return p.a * std::log(p.b) - std::lgamma(p.a) - (p.a + 1.0) * mean_log_x -
         p.b * mean_inv_x;
}

GammaParams fit_gamma_from_expectations(double mean_x, double mean_log_x) {
  if (!positive_finite(mean_x) || !std::isfinite(mean_log_x))
    throw DomainError("fit_gamma_from_expectations: invalid moments");
  const double gap = std::log(mean_x) - mean_log_x;
  if (!(gap > 0.0))
    throw DomainError("fit_gamma_from_expectations: infeasible moments, "
                      "Jensen gap log E[x] - E[log x] = " + std::to_string(gap));
  const double alpha = solve_digamma_log_gap(-gap);
  return {alpha, alpha / mean_x};
}

InvGammaParams fit_inv_gamma_from_expectations(double mean_inv_x,
                                               double mean_log_x) {
  if (!positive_finite(mean_inv_x) || !std::isfinite(mean_log_x))
    throw DomainError("fit_inv_gamma_from_expectations: invalid moments");
  // 1/x ~ Gamma(a, b) with E[log 1/x] = -mean_log_x.
  const double gap = std::log(mean_inv_x) + mean_log_x;
  if (!(gap > 0.0))
    throw DomainError("fit_inv_gamma_from_expectations: infeasible moments, "
                      "Jensen gap log E[1/x] + E[log x] = " + std::to_string(gap));
  const double a = solve_digamma_log_gap(-gap);
  return {a, a / mean_inv_x};
}

}  // namespace wcfa
