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

#ifndef WCFA_REFERENCE_HPP_
#define WCFA_REFERENCE_HPP_

#include "wcfa/estimators.hpp"
#include "wcfa/inference.hpp"
#include "wcfa/model.hpp"
#include "wcfa/score_data.hpp"

/// Serial, direct transcriptions of the estimators and the variational bound.
/// They work on raw scores with no precomputed index and no parallelism and
/// are kept as oracles for the optimised kernels and as benchmark baselines.
namespace wcfa::reference {

/// Same RNG schedule as the kernel; results must match it bit for bit.
EstimateWithCI estimate_pfa_zero_effort(const TrialCorpus& corpus, double tau,
                                        const EstimatorConfig& cfg);
EstimateWithCI estimate_pfa_worst_case(const TrialCorpus& corpus, double tau,
                                       const EstimatorConfig& cfg);

/// Draws all N * L scores per iteration. Agrees with the kernel only in
/// distribution since it consumes randomness differently.
EstimateWithCI predict_pfa_sampling(const Hyperparameters& h, double tau,
                                    const EstimatorConfig& cfg,
                                    std::size_t scores_per_pair);

/// Bound with every data term summed over raw scores.
double elbo(const TrialCorpus& corpus, const PosteriorFactors& q, const Hyperparameters& h);

}  // namespace wcfa::reference

#endif  // WCFA_REFERENCE_HPP_
