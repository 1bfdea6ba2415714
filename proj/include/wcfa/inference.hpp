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

#ifndef WCFA_INFERENCE_HPP_
#define WCFA_INFERENCE_HPP_

#include <cstddef>
#include <optional>
#include <vector>

#include "wcfa/model.hpp"
#include "wcfa/parallel.hpp"
#include "wcfa/score_data.hpp"
#include "wcfa/special_math.hpp"

namespace wcfa {

/// Per-pair sufficient statistics of the observed scores. The centred sum of
/// squares keeps the data term of the bound free of cancellation.
struct PairData {
  std::size_t count = 0;
  double mean = 0.0;
  double centered_ss = 0.0;  // sum_l (s_l - mean)^2
};

struct TargetData {
  std::vector<PairData> pairs;
  std::size_t total_scores = 0;
};

struct ScoreStatistics {
  std::vector<TargetData> targets;
  static ScoreStatistics from_corpus(const TrialCorpus& corpus);
};

/// Mean-field factors for one target: q(m) q(sigma^2) q(lambda) prod_j q(mu_j).
struct TargetFactors {
  GaussianParams m;
  InvGammaParams sigma;
  GammaParams lambda;
  std::vector<GaussianParams> mu;
};

struct PosteriorFactors {
  std::vector<TargetFactors> targets;
  /// Every factor set to its prior under `h` (q(mu_j) to the prior predictive
  /// N(mu0, sigma0^2 + E[sigma^2 / lambda]) when that is finite, else N(mu0, sigma0^2)).
  static PosteriorFactors at_prior(const ScoreStatistics& data, const Hyperparameters& h);
};

struct TargetExpectations {
  double m = 0.0, m2 = 0.0;
  double inv_sigma = 0.0, log_sigma = 0.0;
  double lambda = 0.0, log_lambda = 0.0;
  std::vector<double> mu, mu2;
};

struct SufficientStats {
  std::vector<TargetExpectations> targets;
};

TargetExpectations expectations(const TargetFactors& q);
SufficientStats expectations(const PosteriorFactors& q);

/// Coordinate updates. Each replaces one factor of target `q` with its
/// optimum given the others; `variance_floor` bounds variational variances
/// from below.
void e_step_update_mu(const TargetData& data, TargetFactors& q, std::size_t j,
                      double variance_floor = 1e-12);
void e_step_update_m(const TargetData& data, TargetFactors& q, const Hyperparameters& h,
                     double variance_floor = 1e-12);
void e_step_update_lambda(const TargetData& data, TargetFactors& q,
                          const Hyperparameters& h);
void e_step_update_sigma(const TargetData& data, TargetFactors& q,
                         const Hyperparameters& h);
/// mu factors, then m, lambda, sigma^2.
void e_step_target(const TargetData& data, TargetFactors& q, const Hyperparameters& h,
                   double variance_floor = 1e-12);

struct MStepOptions {
  double variance_floor = 1e-12;
};

/// Exact maximiser of the bound over the hyper-parameters given the
/// posterior expectations. sigma0^2 includes the posterior variances of m.
Hyperparameters m_step(const SufficientStats& stats, const MStepOptions& opts = {});

/// Evidence lower bound E_q[log p(s, latents | h)] - E_q[log q].
double target_elbo(const TargetData& data, const TargetFactors& q,
                   const Hyperparameters& h);
double elbo(const ScoreStatistics& data, const PosteriorFactors& q,
            const Hyperparameters& h, Execution exec = Execution::parallel);
double elbo(const TrialCorpus& corpus, const PosteriorFactors& q,
            const Hyperparameters& h);

/// Method-of-moments starting point from per-pair means and variances.
Hyperparameters moment_initialization(const ScoreStatistics& data);

struct FitOptions {
  std::size_t max_iterations = 500;
  double relative_tolerance = 1e-7;
  double variance_floor = 1e-12;
  /// When false only the variational factors are optimised (h stays fixed).
  bool update_hyperparameters = true;
  Execution exec = Execution::parallel;
};

struct FitReport {
  Hyperparameters hyperparameters;
  /// Bound at the initial state followed by its value after every iteration.
  std::vector<double> elbo_trace;
  std::size_t iterations = 0;
  bool converged = false;
  PosteriorFactors posterior;
};

/// Variational EM: alternates a full E-step sweep over all targets with an
/// M-step until the relative change of the bound drops below tolerance.
FitReport fit(const TrialCorpus& corpus, std::optional<Hyperparameters> init = {},
              const FitOptions& opts = {});
FitReport fit(const ScoreStatistics& data, std::optional<Hyperparameters> init = {},
              const FitOptions& opts = {});

}  // namespace wcfa

#endif  // WCFA_INFERENCE_HPP_
