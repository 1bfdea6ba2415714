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

#ifndef WCFA_MODEL_HPP_
#define WCFA_MODEL_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wcfa/estimators.hpp"
#include "wcfa/parallel.hpp"
#include "wcfa/rng.hpp"
#include "wcfa/special_math.hpp"

namespace wcfa {

/// Hyper-parameters of the hierarchical score model:
///   m ~ N(mu0, sigma0_sq), lambda ~ Gamma(alpha_lambda, beta_lambda),
///   sigma^2 ~ InvGamma(a_sigma, b_sigma), mu | m, lambda, sigma^2 ~ N(m, sigma^2 / lambda),
///   s | mu, sigma^2 ~ N(mu, sigma^2).
/// (m, lambda, sigma^2) belong to a target speaker and are shared by all of
/// its impostor pairs; mu belongs to one (target, impostor) pair.
struct Hyperparameters {
  double mu0 = 0.0;
  double sigma0_sq = 1.0;
  double a_sigma = 2.0;
  double b_sigma = 1.0;
  double alpha_lambda = 2.0;
  double beta_lambda = 1.0;

  void validate() const;
  GammaParams lambda_prior() const { return {alpha_lambda, beta_lambda}; }
  InvGammaParams sigma_prior() const { return {a_sigma, b_sigma}; }

  /// Sets one field by its JSON name; throws ConfigError for unknown names.
  void set(const std::string& name, double value);

  bool operator==(const Hyperparameters&) const = default;
};

nlohmann::json to_json(const Hyperparameters& h);
Hyperparameters hyperparameters_from_json(const nlohmann::json& j);

struct TargetDraw {
  double m = 0.0;
  double lambda = 1.0;
  double sigma_sq = 1.0;
};

struct PairDraw {
  double mu = 0.0;
};

/// Default pair size for model-based prediction: 18 x 18 utterance pairs.
inline constexpr std::size_t kDefaultScoresPerPair = 324;

TargetDraw sample_target(const Hyperparameters& h, RngStream& rng);
PairDraw sample_pair(const TargetDraw& t, RngStream& rng);
std::vector<double> sample_scores(const TargetDraw& t, const PairDraw& p,
                                  std::size_t count, RngStream& rng);

/// Deterministic latent draws for testing: outer iteration i uses
/// targets[i % size] and pair_means[i % size], which must hold exactly N
/// values. Score noise is still random.
struct InjectedLatents {
  std::vector<TargetDraw> targets;
  std::vector<std::vector<double>> pair_means;
};

struct PredictOptions {
  std::size_t scores_per_pair = kDefaultScoresPerPair;
  Execution exec = Execution::parallel;
  const InjectedLatents* injected = nullptr;
};

/// Model-based P^N_FA by simulating score sets: per iteration one target
/// draw, N pair draws sharing it, N sets of L scores; the set with the
/// highest sample mean is kept and its FA fraction recorded.
///
/// Only sample means decide the selection, and for Gaussian scores the
/// sample mean of a set is independent of its residuals. The kernel
/// therefore draws each candidate's sample mean directly from
/// N(mu, sigma^2 / L) and materialises L scores only for the winner, as its
/// mean plus independently drawn centred residuals. This is distributionally
/// identical to drawing all N * L scores (see reference::predict_pfa_sampling)
/// at O(N + L) cost per iteration.
EstimateWithCI predict_pfa_sampling(const Hyperparameters& h, double tau,
                                    const EstimatorConfig& cfg,
                                    const PredictOptions& opts = {});
std::vector<double> predict_sampling_per_iteration(const Hyperparameters& h, double tau,
                                                   const EstimatorConfig& cfg,
                                                   const PredictOptions& opts = {});

/// Closed-form variant: per iteration accumulates 1 - Phi(tau; max_j mu_j,
/// sigma^2) using the latent pair means.
EstimateWithCI predict_pfa_closed_form(const Hyperparameters& h, double tau,
                                       const EstimatorConfig& cfg,
                                       const PredictOptions& opts = {});
std::vector<double> predict_closed_form_per_iteration(const Hyperparameters& h,
                                                      double tau,
                                                      const EstimatorConfig& cfg,
                                                      const PredictOptions& opts = {});

/// Scores from the full hierarchy, each with a fresh target and pair.
std::vector<double> marginal_score_samples(const Hyperparameters& h, std::size_t count,
                                           RngStream& rng);

}  // namespace wcfa

#endif  // WCFA_MODEL_HPP_
