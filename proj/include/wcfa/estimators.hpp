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

#ifndef WCFA_ESTIMATORS_HPP_
#define WCFA_ESTIMATORS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "wcfa/parallel.hpp"
#include "wcfa/rng.hpp"
#include "wcfa/score_data.hpp"

namespace wcfa {

/// Stream ids of the per-iteration RNG families: iteration i of an estimator
/// draws from RngStream(seed, family).split(i).
namespace stream_family {
inline constexpr std::uint64_t kZeroEffort = 1;
inline constexpr std::uint64_t kWorstCase = 2;
inline constexpr std::uint64_t kDiagnose = 3;
inline constexpr std::uint64_t kModelSampling = 11;
inline constexpr std::uint64_t kModelClosedForm = 12;
}  // namespace stream_family

enum class Selection { closest_by_mean, random };

struct EstimatorConfig {
  std::size_t t_outer = 1000;
  std::size_t n_impostors = 1;
  std::uint64_t seed = 0;
  Selection selection = Selection::closest_by_mean;
  double ci_level = 0.99;
  void validate() const;
};

struct EstimateWithCI {
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double std_error = 0.0;
  std::size_t n_outer = 0;
  std::size_t n_impostors = 0;
  double tau = 0.0;
};

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Normal-approximation interval mean +- z(level) * s / sqrt(n) over
/// per-iteration estimates, clamped to [0, 1]. Needs at least two values.
Interval confidence_interval(std::span<const double> per_iteration, double level);

EstimateWithCI summarize_estimate(std::span<const double> per_iteration, double level,
                                  std::size_t n_impostors, double tau);

/// Half-width z(level) * sqrt(se_a^2 + se_b^2) for comparing two estimates.
double joint_ci_halfwidth(const EstimateWithCI& a, const EstimateWithCI& b,
                          double level = 0.99);

/// Per-pair statistics precomputed once per corpus so repeated estimates at
/// different thresholds or population sizes skip rescanning raw scores.
class CorpusIndex {
 public:
  struct Pair {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;  // n - 1 denominator; 0 for a single score
    std::vector<double> sorted_scores;
    /// Fraction of the pair's scores strictly above tau.
    double pfa(double tau) const;
  };

  explicit CorpusIndex(const TrialCorpus& corpus);

  std::size_t target_count() const { return targets_.size(); }
  std::size_t impostor_count(std::size_t target) const {
    return targets_[target].size();
  }
  std::size_t min_impostors() const { return min_impostors_; }
  const Pair& pair(std::size_t target, std::size_t impostor) const {
    return targets_[target][impostor];
  }

 private:
  std::vector<std::vector<Pair>> targets_;
  std::size_t min_impostors_ = 0;
};

/// Mean of a score list, summed in list order.
double pair_mean(std::span<const double> scores);

/// Floyd's algorithm: k distinct indices from [0, population), appended to
/// `out` (cleared first). `scratch` is a membership bitmap sized to at least
/// `population`; it is returned all-zero.
void sample_without_replacement(RngStream& rng, std::size_t population, std::size_t k,
                                std::vector<std::size_t>& out,
                                std::vector<unsigned char>& scratch);

/// Index of the highest-mean candidate; equal means resolve to the lowest
/// impostor index.
std::size_t closest_candidate(const CorpusIndex& index, std::size_t target,
                              std::span<const std::size_t> candidates);

std::vector<double> zero_effort_per_iteration(const CorpusIndex& index, double tau,
                                              const EstimatorConfig& cfg,
                                              Execution exec = Execution::parallel);
std::vector<double> worst_case_per_iteration(const CorpusIndex& index, double tau,
                                             const EstimatorConfig& cfg,
                                             Execution exec = Execution::parallel);

/// Zero-effort false alarm rate: random target, random impostor, per-pair
/// FA fraction, averaged over cfg.t_outer iterations. cfg.n_impostors is
/// ignored.
EstimateWithCI estimate_pfa_zero_effort(const CorpusIndex& index, double tau,
                                        const EstimatorConfig& cfg,
                                        Execution exec = Execution::parallel);
EstimateWithCI estimate_pfa_zero_effort(const TrialCorpus& corpus, double tau,
                                        const EstimatorConfig& cfg,
                                        Execution exec = Execution::parallel);

/// Worst-case false alarm rate with N impostors. Each iteration draws a
/// target with replacement, N distinct impostors without replacement, keeps
/// the highest-mean impostor (or a random one under Selection::random) and
/// records that pair's FA fraction.
EstimateWithCI estimate_pfa_worst_case(const CorpusIndex& index, double tau,
                                       const EstimatorConfig& cfg,
                                       Execution exec = Execution::parallel);
EstimateWithCI estimate_pfa_worst_case(const TrialCorpus& corpus, double tau,
                                       const EstimatorConfig& cfg,
                                       Execution exec = Execution::parallel);

struct DiagnosticsReport {
  std::optional<double> mean_pair_skewness;
  std::size_t skewness_pairs_used = 0;
  std::size_t skewness_pairs_excluded = 0;
  std::optional<double> pair_mean_skewness;
  /// Square roots of the average variance of the closest (resp. random)
  /// impostor's scores over the sampled iterations.
  double closest_impostor_stdev = 0.0;
  double random_impostor_stdev = 0.0;
  std::size_t variance_iterations_skipped = 0;
  std::size_t n_impostors = 0;
  std::size_t t_outer = 0;
  double tau = 0.0;
  /// Empirical P^N_FA for the same sampled candidate sets.
  double closest_pfa = 0.0;
  double random_pfa = 0.0;
};

DiagnosticsReport diagnose(const TrialCorpus& corpus, double tau,
                           const EstimatorConfig& cfg,
                           Execution exec = Execution::parallel);
nlohmann::json to_json(const DiagnosticsReport& report);

}  // namespace wcfa

#endif  // WCFA_ESTIMATORS_HPP_
