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

#include "wcfa/reference.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "wcfa/error.hpp"

namespace wcfa::reference {
namespace {

double fraction_above(const std::vector<double>& scores, double tau) {
  std::size_t above = 0;
  for (double s : scores) above += s > tau ? 1 : 0;
  return static_cast<double>(above) / static_cast<double>(scores.size());
}

}  // namespace

EstimateWithCI estimate_pfa_zero_effort(const TrialCorpus& corpus, double tau,
                                        const EstimatorConfig& cfg) {
  cfg.validate();
  corpus.validate();
  const RngStream family(cfg.seed, stream_family::kZeroEffort);
  std::vector<double> per_iter;
  for (std::size_t it = 0; it < cfg.t_outer; ++it) {
    RngStream rng = family.split(it);
    const auto& target = corpus.targets[rng.uniform_index(corpus.targets.size())];
    const auto& impostor = target.impostors[rng.uniform_index(target.impostors.size())];
    per_iter.push_back(fraction_above(impostor.scores, tau));
  }
  return summarize_estimate(per_iter, cfg.ci_level, 1, tau);
}

EstimateWithCI estimate_pfa_worst_case(const TrialCorpus& corpus, double tau,
                                       const EstimatorConfig& cfg) {
  cfg.validate();
  corpus.validate();
  if (cfg.n_impostors > corpus.min_impostors())
    throw ConfigError("n_impostors exceeds the smallest impostor list");
  const RngStream family(cfg.seed, stream_family::kWorstCase);
  std::vector<double> per_iter;
  std::vector<std::size_t> candidates;
  std::vector<unsigned char> scratch;
  for (std::size_t it = 0; it < cfg.t_outer; ++it) {
    RngStream rng = family.split(it);
    const auto& target = corpus.targets[rng.uniform_index(corpus.targets.size())];
    sample_without_replacement(rng, target.impostors.size(), cfg.n_impostors, candidates,
                               scratch);
    std::size_t chosen = 0;
    if (cfg.selection == Selection::closest_by_mean) {
      double best = -std::numeric_limits<double>::infinity();
      chosen = target.impostors.size();
      for (std::size_t c : candidates) {
        const double m = pair_mean(target.impostors[c].scores);
        if (m > best || (m == best && c < chosen)) {
          best = m;
          chosen = c;
        }
      }
    } else {
      chosen = candidates[rng.uniform_index(candidates.size())];
    }
    per_iter.push_back(fraction_above(target.impostors[chosen].scores, tau));
  }
  return summarize_estimate(per_iter, cfg.ci_level, cfg.n_impostors, tau);
}

EstimateWithCI predict_pfa_sampling(const Hyperparameters& h, double tau,
                                    const EstimatorConfig& cfg,
                                    std::size_t scores_per_pair) {
  h.validate();
  cfg.validate();
  const RngStream family(cfg.seed, stream_family::kModelSampling);
  std::vector<double> per_iter;
  for (std::size_t it = 0; it < cfg.t_outer; ++it) {
    RngStream rng = family.split(it);
    const TargetDraw t = sample_target(h, rng);
    std::vector<double> best_set;
    double best_mean = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < cfg.n_impostors; ++j) {
      const PairDraw p = sample_pair(t, rng);
      std::vector<double> set = sample_scores(t, p, scores_per_pair, rng);
      const double m = pair_mean(set);
      if (m > best_mean) {
        best_mean = m;
        best_set = std::move(set);
      }
    }
    per_iter.push_back(fraction_above(best_set, tau));
  }
  return summarize_estimate(per_iter, cfg.ci_level, cfg.n_impostors, tau);
}

double elbo(const TrialCorpus& corpus, const PosteriorFactors& q,
            const Hyperparameters& h) {
  const double log2pi = std::log(2.0 * std::numbers::pi);
  long double total = 0;
  for (std::size_t i = 0; i < corpus.targets.size(); ++i) {
    const auto& qi = q.targets[i];
    const double e_inv = qi.sigma.a / qi.sigma.b;
    const double e_log_sigma = std::log(qi.sigma.b) - digamma(qi.sigma.a);
    const double e_lambda = qi.lambda.alpha / qi.lambda.beta;
    const double e_log_lambda = digamma(qi.lambda.alpha) - std::log(qi.lambda.beta);
    const double e_m = qi.m.mean, e_m2 = qi.m.mean * qi.m.mean + qi.m.variance;

    total += -0.5 * log2pi - 0.5 * std::log(h.sigma0_sq) -
             (e_m2 - 2.0 * e_m * h.mu0 + h.mu0 * h.mu0) / (2.0 * h.sigma0_sq);
    total += h.alpha_lambda * std::log(h.beta_lambda) - std::lgamma(h.alpha_lambda) +
             (h.alpha_lambda - 1.0) * e_log_lambda - h.beta_lambda * e_lambda;
    total += h.a_sigma * std::log(h.b_sigma) - std::lgamma(h.a_sigma) -
             (h.a_sigma + 1.0) * e_log_sigma - h.b_sigma * e_inv;
    for (std::size_t j = 0; j < corpus.targets[i].impostors.size(); ++j) {
      const double e_mu = qi.mu[j].mean;
      const double e_mu2 = e_mu * e_mu + qi.mu[j].variance;
      total += -0.5 * log2pi - 0.5 * e_log_sigma + 0.5 * e_log_lambda -
               0.5 * e_lambda * e_inv * (e_mu2 - 2.0 * e_mu * e_m + e_m2);
      for (double s : corpus.targets[i].impostors[j].scores)
        total += -0.5 * log2pi - 0.5 * e_log_sigma -
                 0.5 * e_inv * (s * s - 2.0 * s * e_mu + e_mu2);
      total += 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * qi.mu[j].variance);
    }
    total += 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * qi.m.variance);
    const auto& g = qi.lambda;
    total += g.alpha - std::log(g.beta) + std::lgamma(g.alpha) +
             (1.0 - g.alpha) * digamma(g.alpha);
    const auto& ig = qi.sigma;
    total += ig.a + std::log(ig.b) + std::lgamma(ig.a) - (1.0 + ig.a) * digamma(ig.a);
  }
  return static_cast<double>(total);
}

}  // namespace wcfa::reference
