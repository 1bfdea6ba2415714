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

#include "wcfa/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "wcfa/error.hpp"

namespace wcfa {
namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

double gaussian_entropy(double variance) {
  return 0.5 * (kLog2Pi + 1.0 + std::log(variance));
}

double gamma_entropy(const GammaParams& g) {
  return g.alpha - std::log(g.beta) + std::lgamma(g.alpha) +
         (1.0 - g.alpha) * digamma(g.alpha);
}

double inv_gamma_entropy(const InvGammaParams& g) {
  return g.a + std::log(g.b) + std::lgamma(g.a) - (1.0 + g.a) * digamma(g.a);
}

// E_q[(mu_j - m)^2] for independent Gaussian factors.
double expected_pair_deviation(const GaussianParams& mu, const GaussianParams& m) {
  const double d = mu.mean - m.mean;
  return mu.variance + m.variance + d * d;
}

// E_q[sum_l (s_l - mu_j)^2].
double expected_residual_ss(const PairData& p, const GaussianParams& mu) {
  const auto n = static_cast<double>(p.count);
  const double d = p.mean - mu.mean;
  return p.centered_ss + n * (d * d + mu.variance);
}

std::string dump_stats(double mean_lambda, double mean_log_lambda, double mean_inv_sigma,
                       double mean_log_sigma) {
  std::ostringstream os;
  os.precision(17);
  os << " [mean E[lambda]=" << mean_lambda << ", mean E[log lambda]=" << mean_log_lambda
     << ", mean E[1/sigma^2]=" << mean_inv_sigma
     << ", mean E[log sigma^2]=" << mean_log_sigma << "]";
  return os.str();
}

}  // namespace

ScoreStatistics ScoreStatistics::from_corpus(const TrialCorpus& corpus) {
  corpus.validate();
  ScoreStatistics out;
  out.targets.resize(corpus.targets.size());
  for (std::size_t i = 0; i < corpus.targets.size(); ++i) {
    const auto& group = corpus.targets[i];
    auto& target = out.targets[i];
    target.pairs.reserve(group.impostors.size());
    for (const auto& imp : group.impostors) {
      PairData p;
      p.count = imp.scores.size();
      double sum = 0.0;
      for (double s : imp.scores) sum += s;
      p.mean = sum / static_cast<double>(p.count);
      for (double s : imp.scores) p.centered_ss += (s - p.mean) * (s - p.mean);
      target.total_scores += p.count;
      target.pairs.push_back(p);
    }
  }
  return out;
}

PosteriorFactors PosteriorFactors::at_prior(const ScoreStatistics& data,
                                            const Hyperparameters& h) {
  h.validate();
  double mu_var = h.sigma0_sq;
  if (h.a_sigma > 1.0 && h.alpha_lambda > 1.0)
    mu_var += (h.b_sigma / (h.a_sigma - 1.0)) * (h.beta_lambda / (h.alpha_lambda - 1.0));
  PosteriorFactors q;
  q.targets.resize(data.targets.size());
  for (std::size_t i = 0; i < data.targets.size(); ++i) {
    auto& t = q.targets[i];
    t.m = {h.mu0, h.sigma0_sq};
    t.sigma = h.sigma_prior();
    t.lambda = h.lambda_prior();
    t.mu.assign(data.targets[i].pairs.size(), GaussianParams{h.mu0, mu_var});
  }
  return q;
}

TargetExpectations expectations(const TargetFactors& q) {
  TargetExpectations e;
  e.m = q.m.mean;
  e.m2 = q.m.mean * q.m.mean + q.m.variance;
  e.inv_sigma = q.sigma.mean_inv();
  e.log_sigma = q.sigma.mean_log();
  e.lambda = q.lambda.mean();
  e.log_lambda = q.lambda.mean_log();
  e.mu.reserve(q.mu.size());
  e.mu2.reserve(q.mu.size());
  for (const auto& mu : q.mu) {
    e.mu.push_back(mu.mean);
    e.mu2.push_back(mu.mean * mu.mean + mu.variance);
  }
  return e;
}

SufficientStats expectations(const PosteriorFactors& q) {
  SufficientStats s;
  s.targets.reserve(q.targets.size());
  for (const auto& t : q.targets) s.targets.push_back(expectations(t));
  return s;
}

void e_step_update_mu(const TargetData& data, TargetFactors& q, std::size_t j,
                      double variance_floor) {
  const auto& p = data.pairs[j];
  const auto n = static_cast<double>(p.count);
  const double e_lambda = q.lambda.mean();
  const double precision = q.sigma.mean_inv() * (n + e_lambda);
  if (!(precision > 0.0) || !std::isfinite(precision))
    throw NumericError("q(mu) update: non-positive precision");
  const double mean = (n * p.mean + e_lambda * q.m.mean) / (n + e_lambda);
  q.mu[j] = {mean, std::max(1.0 / precision, variance_floor)};
}

void e_step_update_m(const TargetData& data, TargetFactors& q, const Hyperparameters& h,
                     double variance_floor) {
  const auto n = static_cast<double>(data.pairs.size());
  const double coupling = q.lambda.mean() * q.sigma.mean_inv();
  double mu_sum = 0.0;
  for (const auto& mu : q.mu) mu_sum += mu.mean;
  const double precision = n * coupling + 1.0 / h.sigma0_sq;
  if (!(precision > 0.0) || !std::isfinite(precision))
    throw NumericError("q(m) update: non-positive precision");
  const double mean = (coupling * mu_sum + h.mu0 / h.sigma0_sq) / precision;
  q.m = {mean, std::max(1.0 / precision, variance_floor)};
}

void e_step_update_lambda(const TargetData& data, TargetFactors& q,
                          const Hyperparameters& h) {
  double deviation = 0.0;
  for (std::size_t j = 0; j < data.pairs.size(); ++j)
    deviation += expected_pair_deviation(q.mu[j], q.m);
  const double alpha = h.alpha_lambda + 0.5 * static_cast<double>(data.pairs.size());
  const double beta = h.beta_lambda + 0.5 * q.sigma.mean_inv() * deviation;
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw NumericError("q(lambda) update: non-positive rate");
  q.lambda = {alpha, beta};
}

void e_step_update_sigma(const TargetData& data, TargetFactors& q,
                         const Hyperparameters& h) {
  double residual = 0.0, deviation = 0.0;
  for (std::size_t j = 0; j < data.pairs.size(); ++j) {
    residual += expected_residual_ss(data.pairs[j], q.mu[j]);
    deviation += expected_pair_deviation(q.mu[j], q.m);
  }
  const double a = h.a_sigma + 0.5 * static_cast<double>(data.pairs.size()) +
                   0.5 * static_cast<double>(data.total_scores);
  const double b = h.b_sigma + 0.5 * residual + 0.5 * q.lambda.mean() * deviation;
  if (!(b > 0.0) || !std::isfinite(b))
    throw NumericError("q(sigma^2) update: non-positive scale");
  q.sigma = {a, b};
}

void e_step_target(const TargetData& data, TargetFactors& q, const Hyperparameters& h,
                   double variance_floor) {
  for (std::size_t j = 0; j < data.pairs.size(); ++j)
    e_step_update_mu(data, q, j, variance_floor);
  e_step_update_m(data, q, h, variance_floor);
  e_step_update_lambda(data, q, h);
  e_step_update_sigma(data, q, h);
}

Hyperparameters m_step(const SufficientStats& stats, const MStepOptions& opts) {
  if (stats.targets.empty()) throw NumericError("m_step: no targets");
  const auto count = static_cast<double>(stats.targets.size());
  long double m_sum = 0, lambda_sum = 0, log_lambda_sum = 0, inv_sigma_sum = 0,
              log_sigma_sum = 0;
  for (const auto& t : stats.targets) {
    m_sum += t.m;
    lambda_sum += t.lambda;
    log_lambda_sum += t.log_lambda;
    inv_sigma_sum += t.inv_sigma;
    log_sigma_sum += t.log_sigma;
  }
  Hyperparameters h;
  h.mu0 = static_cast<double>(m_sum / count);
  long double spread = 0;
  for (const auto& t : stats.targets) {
    const double d = t.m - h.mu0;
    spread += d * d + std::max(t.m2 - t.m * t.m, 0.0);
  }
  h.sigma0_sq = std::max(static_cast<double>(spread / count), opts.variance_floor);

  const auto mean_lambda = static_cast<double>(lambda_sum / count);
  const auto mean_log_lambda = static_cast<double>(log_lambda_sum / count);
  const auto mean_inv_sigma = static_cast<double>(inv_sigma_sum / count);
  const auto mean_log_sigma = static_cast<double>(log_sigma_sum / count);
  try {
    const GammaParams g = fit_gamma_from_expectations(mean_lambda, mean_log_lambda);
    const InvGammaParams ig =
        fit_inv_gamma_from_expectations(mean_inv_sigma, mean_log_sigma);
    h.alpha_lambda = g.alpha;
    h.beta_lambda = std::max(g.beta, opts.variance_floor);
    h.a_sigma = ig.a;
    h.b_sigma = std::max(ig.b, opts.variance_floor);
  } catch (const Error& e) {
    throw NumericError(std::string("m_step: ") + e.what() +
                       dump_stats(mean_lambda, mean_log_lambda, mean_inv_sigma,
                                  mean_log_sigma));
  }
  return h;
}

double target_elbo(const TargetData& data, const TargetFactors& q,
                   const Hyperparameters& h) {
  const TargetExpectations e = expectations(q);
  long double total = 0;

  // log p(m)
  total += -0.5 * (kLog2Pi + std::log(h.sigma0_sq)) -
           (q.m.variance + (q.m.mean - h.mu0) * (q.m.mean - h.mu0)) / (2.0 * h.sigma0_sq);
  // log p(lambda)
  total += h.alpha_lambda * std::log(h.beta_lambda) - std::lgamma(h.alpha_lambda) +
           (h.alpha_lambda - 1.0) * e.log_lambda - h.beta_lambda * e.lambda;
  // log p(sigma^2)
  total += h.a_sigma * std::log(h.b_sigma) - std::lgamma(h.a_sigma) -
           (h.a_sigma + 1.0) * e.log_sigma - h.b_sigma * e.inv_sigma;

  for (std::size_t j = 0; j < data.pairs.size(); ++j) {
    const auto& p = data.pairs[j];
    const auto n = static_cast<double>(p.count);
    // log p(mu_j | m, lambda, sigma^2)
    total += -0.5 * kLog2Pi - 0.5 * e.log_sigma + 0.5 * e.log_lambda -
             0.5 * e.lambda * e.inv_sigma * expected_pair_deviation(q.mu[j], q.m);
    // log p(s_j. | mu_j, sigma^2)
    total += -0.5 * n * (kLog2Pi + e.log_sigma) -
             0.5 * e.inv_sigma * expected_residual_ss(p, q.mu[j]);
    total += gaussian_entropy(q.mu[j].variance);
  }
  total += gaussian_entropy(q.m.variance) + gamma_entropy(q.lambda) +
           inv_gamma_entropy(q.sigma);
  return static_cast<double>(total);
}

double elbo(const ScoreStatistics& data, const PosteriorFactors& q,
            const Hyperparameters& h, Execution exec) {
  if (data.targets.size() != q.targets.size())
    throw ConfigError("elbo: factor and data shapes differ");
  const auto parts = indexed_map<double>(data.targets.size(), exec, [&](std::size_t i) {
    return target_elbo(data.targets[i], q.targets[i], h);
  });
  long double total = 0;
  for (double p : parts) total += p;
  return static_cast<double>(total);
}

double elbo(const TrialCorpus& corpus, const PosteriorFactors& q,
            const Hyperparameters& h) {
  return elbo(ScoreStatistics::from_corpus(corpus), q, h);
}

Hyperparameters moment_initialization(const ScoreStatistics& data) {
  if (data.targets.empty()) throw ConfigError("moment_initialization: no targets");
  // Overall score variance sets the scale for fallbacks.
  long double n_all = 0, sum_all = 0;
  for (const auto& t : data.targets)
    for (const auto& p : t.pairs) {
      n_all += p.count;
      sum_all += p.count * p.mean;
    }
  const double grand = static_cast<double>(sum_all / n_all);
  long double ss_all = 0, within_ss = 0, within_df = 0;
  for (const auto& t : data.targets)
    for (const auto& p : t.pairs) {
      ss_all += p.centered_ss + p.count * (p.mean - grand) * (p.mean - grand);
      within_ss += p.centered_ss;
      within_df += p.count - 1;
    }
  double scale = static_cast<double>(ss_all / n_all);
  if (!(scale > 0.0)) scale = 1.0;
  double pooled_within = within_df > 0 ? static_cast<double>(within_ss / within_df) : 0.0;
  if (!(pooled_within > 0.0)) pooled_within = scale;
  const double var_floor = 1e-6 * scale;

  std::vector<double> target_means, precisions, lambdas;
  for (const auto& t : data.targets) {
    double mean = 0.0;
    for (const auto& p : t.pairs) mean += p.mean;
    mean /= static_cast<double>(t.pairs.size());
    target_means.push_back(mean);

    double ss = 0.0, df = 0.0, inv_len = 0.0, between = 0.0;
    for (const auto& p : t.pairs) {
      ss += p.centered_ss;
      df += static_cast<double>(p.count - 1);
      inv_len += 1.0 / static_cast<double>(p.count);
      between += (p.mean - mean) * (p.mean - mean);
    }
    const double within = df > 0 && ss > 0 ? ss / df : pooled_within;
    const double v = std::max(within, var_floor);
    precisions.push_back(1.0 / v);
    const std::size_t n_pairs = t.pairs.size();
    double w = n_pairs > 1 ? between / static_cast<double>(n_pairs - 1) -
                                 v * inv_len / static_cast<double>(n_pairs)
                           : 0.0;
    w = std::max(w, 1e-3 * v);
    lambdas.push_back(v / w);
  }

  auto mean_var = [](const std::vector<double>& xs) {
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(xs.size());
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    v /= static_cast<double>(xs.size());
    return std::pair{m, v};
  };
  // Shape from the coefficient of variation; rate matches the mean.
  auto gamma_moments = [](double mean, double var, double fallback_shape) {
    double shape = var > 0.0 ? mean * mean / var : fallback_shape;
    shape = std::clamp(shape, 1.5, 1e3);
    return GammaParams{shape, shape / mean};
  };

  Hyperparameters h;
  const auto [mu0, spread] = mean_var(target_means);
  h.mu0 = mu0;
  h.sigma0_sq = std::max(spread, 1e-3 * scale);
  const auto [p_mean, p_var] = mean_var(precisions);
  const GammaParams prec = gamma_moments(p_mean, p_var, 10.0);
  h.a_sigma = prec.alpha;
  h.b_sigma = prec.alpha / p_mean;
  const auto [l_mean, l_var] = mean_var(lambdas);
  const GammaParams lam = gamma_moments(l_mean, l_var, 2.0);
  h.alpha_lambda = lam.alpha;
  h.beta_lambda = lam.beta;
  h.validate();
  return h;
}

namespace {

std::optional<double> constant_score(const ScoreStatistics& data) {
  std::optional<double> value;
  for (const auto& t : data.targets)
    for (const auto& p : t.pairs) {
      if (p.centered_ss != 0.0 || (value && p.mean != *value)) return std::nullopt;
      value = p.mean;
    }
  return value;
}

}  // namespace

FitReport fit(const ScoreStatistics& data, std::optional<Hyperparameters> init,
              const FitOptions& opts) {
  if (data.targets.empty()) throw ConfigError("fit: corpus has no targets");
  FitReport report;
  report.hyperparameters = init ? *init : moment_initialization(data);
  report.hyperparameters.validate();

  // Without any score variability the bound grows without limit as sigma^2
  // shrinks, so jump straight to the floored solution.
  if (const auto c = constant_score(data); c && opts.update_hyperparameters) {
    Hyperparameters& h = report.hyperparameters;
    h.mu0 = *c;
    h.sigma0_sq = opts.variance_floor;
    h.b_sigma = h.a_sigma * opts.variance_floor;
    report.posterior = PosteriorFactors::at_prior(data, h);
    indexed_for(data.targets.size(), opts.exec, [&](std::size_t i) {
      e_step_target(data.targets[i], report.posterior.targets[i], h, opts.variance_floor);
    });
    report.elbo_trace.push_back(elbo(data, report.posterior, h, opts.exec));
    report.converged = true;
    return report;
  }

  report.posterior = PosteriorFactors::at_prior(data, report.hyperparameters);
  report.elbo_trace.push_back(elbo(data, report.posterior, report.hyperparameters, opts.exec));

  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    try {
      const Hyperparameters& h = report.hyperparameters;
      indexed_for(data.targets.size(), opts.exec, [&](std::size_t i) {
        e_step_target(data.targets[i], report.posterior.targets[i], h, opts.variance_floor);
      });
      if (opts.update_hyperparameters)
        report.hyperparameters =
            m_step(expectations(report.posterior), {opts.variance_floor});
    } catch (const NumericError& e) {
      throw NumericError("fit iteration " + std::to_string(it + 1) + ": " + e.what());
    }
    const double previous = report.elbo_trace.back();
    const double current = elbo(data, report.posterior, report.hyperparameters, opts.exec);
    report.elbo_trace.push_back(current);
    report.iterations = it + 1;
    if (!std::isfinite(current))
      throw NumericError("fit iteration " + std::to_string(it + 1) +
                         ": bound is not finite");
    if (std::abs(current - previous) < opts.relative_tolerance * std::abs(current)) {
      report.converged = true;
      break;
    }
  }
  return report;
}

FitReport fit(const TrialCorpus& corpus, std::optional<Hyperparameters> init,
              const FitOptions& opts) {
  return fit(ScoreStatistics::from_corpus(corpus), init, opts);
}

}  // namespace wcfa
