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

#include "wcfa/model.hpp"

#include <cmath>
#include <limits>

#include "wcfa/error.hpp"

namespace wcfa {
namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

void validate_prediction(const Hyperparameters& h, const EstimatorConfig& cfg,
                         const PredictOptions& opts) {
  h.validate();
  cfg.validate();
  if (opts.scores_per_pair < 1) throw ConfigError("scores_per_pair must be at least 1");
  if (opts.injected) {
    const auto& inj = *opts.injected;
    if (inj.targets.empty() || inj.targets.size() != inj.pair_means.size())
      throw ConfigError("injected latents need matching, non-empty target and pair lists");
    for (const auto& means : inj.pair_means)
      if (means.size() != cfg.n_impostors)
        throw ConfigError("injected pair means must hold exactly n_impostors values");
  }
}

TargetDraw target_for(std::size_t it, const Hyperparameters& h,
                      const PredictOptions& opts, RngStream& rng) {
  if (opts.injected) return opts.injected->targets[it % opts.injected->targets.size()];
  return sample_target(h, rng);
}

}  // namespace

void Hyperparameters::validate() const {
  if (!std::isfinite(mu0)) throw DomainError("mu0 must be finite");
  if (!positive_finite(sigma0_sq) || !positive_finite(a_sigma) ||
      !positive_finite(b_sigma) || !positive_finite(alpha_lambda) ||
      !positive_finite(beta_lambda))
    throw DomainError("variance, shape and scale hyper-parameters must be positive");
}

void Hyperparameters::set(const std::string& name, double value) {
  if (name == "mu0") mu0 = value;
  else if (name == "sigma0_sq") sigma0_sq = value;
  else if (name == "a_sigma") a_sigma = value;
  else if (name == "b_sigma") b_sigma = value;
  else if (name == "alpha_lambda") alpha_lambda = value;
  else if (name == "beta_lambda") beta_lambda = value;
  else throw ConfigError("unknown hyper-parameter '" + name + "'");
}

nlohmann::json to_json(const Hyperparameters& h) {
  return {{"mu0", h.mu0},           {"sigma0_sq", h.sigma0_sq},
          {"a_sigma", h.a_sigma},   {"b_sigma", h.b_sigma},
          {"alpha_lambda", h.alpha_lambda}, {"beta_lambda", h.beta_lambda}};
}

Hyperparameters hyperparameters_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("hyper-parameters must be a JSON object");
  Hyperparameters h;
  for (const char* key :
       {"mu0", "sigma0_sq", "a_sigma", "b_sigma", "alpha_lambda", "beta_lambda"}) {
    if (!j.contains(key) || !j[key].is_number())
      throw ConfigError(std::string("hyper-parameter '") + key + "' missing or not a number");
    h.set(key, j[key].get<double>());
  }
  h.validate();
  return h;
}

TargetDraw sample_target(const Hyperparameters& h, RngStream& rng) {
  TargetDraw t;
  t.m = h.mu0 + std::sqrt(h.sigma0_sq) * rng.standard_normal();
  t.lambda = sample_gamma(h.lambda_prior(), rng);
  t.sigma_sq = sample_inv_gamma(h.sigma_prior(), rng);
  return t;
}

PairDraw sample_pair(const TargetDraw& t, RngStream& rng) {
  return {t.m + std::sqrt(t.sigma_sq / t.lambda) * rng.standard_normal()};
}

std::vector<double> sample_scores(const TargetDraw& t, const PairDraw& p,
                                  std::size_t count, RngStream& rng) {
  std::vector<double> scores(count);
  const double sd = std::sqrt(t.sigma_sq);
  for (double& s : scores) s = p.mu + sd * rng.standard_normal();
  return scores;
}

std::vector<double> predict_sampling_per_iteration(const Hyperparameters& h, double tau,
                                                   const EstimatorConfig& cfg,
                                                   const PredictOptions& opts) {
  validate_prediction(h, cfg, opts);
  const RngStream family(cfg.seed, stream_family::kModelSampling);
  const std::size_t n = cfg.n_impostors;
  const std::size_t len = opts.scores_per_pair;
  return indexed_map<double>(cfg.t_outer, opts.exec, [&](std::size_t it) {
    thread_local std::vector<double> residuals;
    RngStream rng = family.split(it);
    const TargetDraw t = target_for(it, h, opts, rng);
    const double pair_sd = std::sqrt(t.sigma_sq / t.lambda);
    const double mean_sd = std::sqrt(t.sigma_sq / static_cast<double>(len));
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      const double mu =
          opts.injected ? opts.injected->pair_means[it % opts.injected->targets.size()][j]
                        : t.m + pair_sd * rng.standard_normal();
      const double sample_mean = mu + mean_sd * rng.standard_normal();
      if (sample_mean > best) best = sample_mean;
    }
    residuals.resize(len);
    double centre = 0.0;
    for (double& z : residuals) {
      z = rng.standard_normal();
      centre += z;
    }
    centre /= static_cast<double>(len);
    const double sd = std::sqrt(t.sigma_sq);
    std::size_t above = 0;
    for (double z : residuals) above += best + sd * (z - centre) > tau ? 1 : 0;
    return static_cast<double>(above) / static_cast<double>(len);
  });
}

EstimateWithCI predict_pfa_sampling(const Hyperparameters& h, double tau,
                                    const EstimatorConfig& cfg,
                                    const PredictOptions& opts) {
  const auto per_iter = predict_sampling_per_iteration(h, tau, cfg, opts);
  return summarize_estimate(per_iter, cfg.ci_level, cfg.n_impostors, tau);
}

std::vector<double> predict_closed_form_per_iteration(const Hyperparameters& h,
                                                      double tau,
                                                      const EstimatorConfig& cfg,
                                                      const PredictOptions& opts) {
  validate_prediction(h, cfg, opts);
  const RngStream family(cfg.seed, stream_family::kModelClosedForm);
  const std::size_t n = cfg.n_impostors;
  return indexed_map<double>(cfg.t_outer, opts.exec, [&](std::size_t it) {
    RngStream rng = family.split(it);
    const TargetDraw t = target_for(it, h, opts, rng);
    double best = -std::numeric_limits<double>::infinity();
    if (opts.injected) {
      for (double mu : opts.injected->pair_means[it % opts.injected->targets.size()])
        best = std::max(best, mu);
    } else {
      const double pair_sd = std::sqrt(t.sigma_sq / t.lambda);
      for (std::size_t j = 0; j < n; ++j)
        best = std::max(best, t.m + pair_sd * rng.standard_normal());
    }
    return normal_sf(tau, {best, t.sigma_sq});
  });
}

EstimateWithCI predict_pfa_closed_form(const Hyperparameters& h, double tau,
                                       const EstimatorConfig& cfg,
                                       const PredictOptions& opts) {
  const auto per_iter = predict_closed_form_per_iteration(h, tau, cfg, opts);
  return summarize_estimate(per_iter, cfg.ci_level, cfg.n_impostors, tau);
}

std::vector<double> marginal_score_samples(const Hyperparameters& h, std::size_t count,
                                           RngStream& rng) {
  h.validate();
  if (count < 1) throw ConfigError("marginal_score_samples: count must be at least 1");
  std::vector<double> out(count);
  for (double& s : out) {
    const TargetDraw t = sample_target(h, rng);
    const PairDraw p = sample_pair(t, rng);
    s = p.mu + std::sqrt(t.sigma_sq) * rng.standard_normal();
  }
  return out;
}

}  // namespace wcfa
