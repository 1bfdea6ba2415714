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

#include "wcfa/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wcfa/error.hpp"
#include "wcfa/special_math.hpp"

namespace wcfa {
namespace {

void require_capacity(const CorpusIndex& index, const EstimatorConfig& cfg) {
  if (cfg.n_impostors > index.min_impostors())
    throw ConfigError("n_impostors=" + std::to_string(cfg.n_impostors) +
                      " exceeds the smallest impostor list (" +
                      std::to_string(index.min_impostors()) + ")");
}

}  // namespace

void EstimatorConfig::validate() const {
  if (t_outer < 2)
    throw ConfigError("t_outer must be at least 2 to form a confidence interval");
  if (n_impostors < 1) throw ConfigError("n_impostors must be at least 1");
  if (!(ci_level > 0.0 && ci_level < 1.0))
    throw ConfigError("ci_level must lie in (0, 1)");
}

Interval confidence_interval(std::span<const double> xs, double level) {
  if (xs.size() < 2)
    throw DomainError("confidence_interval: need at least two estimates");
  if (!(level > 0.0 && level < 1.0))
    throw DomainError("confidence_interval: level must lie in (0, 1)");
  const auto n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double se = std::sqrt(ss / (n - 1.0) / n);
  const double z = normal_quantile(0.5 + 0.5 * level);
  return {std::clamp(mean - z * se, 0.0, 1.0), std::clamp(mean + z * se, 0.0, 1.0)};
}

EstimateWithCI summarize_estimate(std::span<const double> xs, double level,
                                  std::size_t n_impostors, double tau) {
  const Interval ci = confidence_interval(xs, level);
  const auto n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  EstimateWithCI e;
  e.value = std::clamp(mean, ci.low, ci.high);
  e.ci_low = ci.low;
  e.ci_high = ci.high;
  e.std_error = std::sqrt(ss / (n - 1.0) / n);
  e.n_outer = xs.size();
  e.n_impostors = n_impostors;
  e.tau = tau;
  return e;
}

double joint_ci_halfwidth(const EstimateWithCI& a, const EstimateWithCI& b,
                          double level) {
  const double z = normal_quantile(0.5 + 0.5 * level);
  return z * std::hypot(a.std_error, b.std_error);
}

double CorpusIndex::Pair::pfa(double tau) const {
  const auto above =
      sorted_scores.end() - std::upper_bound(sorted_scores.begin(), sorted_scores.end(), tau);
  return static_cast<double>(above) / static_cast<double>(count);
}

double pair_mean(std::span<const double> scores) {
  double sum = 0.0;
  for (double s : scores) sum += s;
  return sum / static_cast<double>(scores.size());
}

CorpusIndex::CorpusIndex(const TrialCorpus& corpus) {
  corpus.validate();
  targets_.resize(corpus.targets.size());
  min_impostors_ = corpus.min_impostors();
  indexed_for(corpus.targets.size(), Execution::parallel, [&](std::size_t i) {
    const auto& group = corpus.targets[i];
    auto& pairs = targets_[i];
    pairs.resize(group.impostors.size());
    for (std::size_t j = 0; j < group.impostors.size(); ++j) {
      const auto& scores = group.impostors[j].scores;
      Pair& p = pairs[j];
      p.count = scores.size();
      p.mean = pair_mean(scores);
      if (p.count > 1) {
        double ss = 0.0;
        for (double s : scores) ss += (s - p.mean) * (s - p.mean);
        p.variance = ss / static_cast<double>(p.count - 1);
      }
      p.sorted_scores = scores;
      std::sort(p.sorted_scores.begin(), p.sorted_scores.end());
    }
  });
}

void sample_without_replacement(RngStream& rng, std::size_t population, std::size_t k,
                                std::vector<std::size_t>& out,
                                std::vector<unsigned char>& scratch) {
  out.clear();
  if (k > population)
    throw ConfigError("cannot draw " + std::to_string(k) + " distinct items from " +
                      std::to_string(population));
  if (scratch.size() < population) scratch.resize(population, 0);
  for (std::size_t j = population - k; j < population; ++j) {
    const auto t = static_cast<std::size_t>(rng.uniform_index(j + 1));
    const std::size_t pick = scratch[t] ? j : t;
    scratch[pick] = 1;
    out.push_back(pick);
  }
  for (std::size_t idx : out) scratch[idx] = 0;
}

std::size_t closest_candidate(const CorpusIndex& index, std::size_t target,
                              std::span<const std::size_t> candidates) {
  std::size_t best = candidates.front();
  double best_mean = index.pair(target, best).mean;
  for (std::size_t c : candidates.subspan(1)) {
    const double m = index.pair(target, c).mean;
    if (m > best_mean || (m == best_mean && c < best)) {
      best = c;
      best_mean = m;
    }
  }
  return best;
}

std::vector<double> zero_effort_per_iteration(const CorpusIndex& index, double tau,
                                              const EstimatorConfig& cfg,
                                              Execution exec) {
  cfg.validate();
  const RngStream family(cfg.seed, stream_family::kZeroEffort);
  return indexed_map<double>(cfg.t_outer, exec, [&](std::size_t it) {
    RngStream rng = family.split(it);
    const auto target = static_cast<std::size_t>(rng.uniform_index(index.target_count()));
    const auto impostor =
        static_cast<std::size_t>(rng.uniform_index(index.impostor_count(target)));
    return index.pair(target, impostor).pfa(tau);
  });
}

std::vector<double> worst_case_per_iteration(const CorpusIndex& index, double tau,
                                             const EstimatorConfig& cfg,
                                             Execution exec) {
  cfg.validate();
  require_capacity(index, cfg);
  const RngStream family(cfg.seed, stream_family::kWorstCase);
  return indexed_map<double>(cfg.t_outer, exec, [&](std::size_t it) {
    thread_local std::vector<std::size_t> candidates;
    thread_local std::vector<unsigned char> scratch;
    RngStream rng = family.split(it);
    const auto target = static_cast<std::size_t>(rng.uniform_index(index.target_count()));
    sample_without_replacement(rng, index.impostor_count(target), cfg.n_impostors,
                               candidates, scratch);
    const std::size_t chosen =
        cfg.selection == Selection::closest_by_mean
            ? closest_candidate(index, target, candidates)
            : candidates[static_cast<std::size_t>(rng.uniform_index(candidates.size()))];
    return index.pair(target, chosen).pfa(tau);
  });
}

EstimateWithCI estimate_pfa_zero_effort(const CorpusIndex& index, double tau,
                                        const EstimatorConfig& cfg, Execution exec) {
  const auto per_iter = zero_effort_per_iteration(index, tau, cfg, exec);
  return summarize_estimate(per_iter, cfg.ci_level, 1, tau);
}

EstimateWithCI estimate_pfa_zero_effort(const TrialCorpus& corpus, double tau,
                                        const EstimatorConfig& cfg, Execution exec) {
  return estimate_pfa_zero_effort(CorpusIndex(corpus), tau, cfg, exec);
}

EstimateWithCI estimate_pfa_worst_case(const CorpusIndex& index, double tau,
                                       const EstimatorConfig& cfg, Execution exec) {
  const auto per_iter = worst_case_per_iteration(index, tau, cfg, exec);
  return summarize_estimate(per_iter, cfg.ci_level, cfg.n_impostors, tau);
}

EstimateWithCI estimate_pfa_worst_case(const TrialCorpus& corpus, double tau,
                                       const EstimatorConfig& cfg, Execution exec) {
  return estimate_pfa_worst_case(CorpusIndex(corpus), tau, cfg, exec);
}

DiagnosticsReport diagnose(const TrialCorpus& corpus, double tau,
                           const EstimatorConfig& cfg, Execution exec) {
  cfg.validate();
  const CorpusIndex index(corpus);
  require_capacity(index, cfg);
  const CorpusSummary summary = corpus_stats(corpus);

  DiagnosticsReport r;
  r.mean_pair_skewness = summary.mean_pair_skewness;
  r.skewness_pairs_excluded = summary.skewness_excluded;
  r.skewness_pairs_used = summary.pairs - summary.skewness_excluded;
  r.pair_mean_skewness = summary.pair_mean_skewness;
  r.n_impostors = cfg.n_impostors;
  r.t_outer = cfg.t_outer;
  r.tau = tau;

  struct Draw {
    double closest_var, random_var, closest_pfa, random_pfa;
    bool closest_ok, random_ok;
  };
  const RngStream family(cfg.seed, stream_family::kDiagnose);
  const auto draws = indexed_map<Draw>(cfg.t_outer, exec, [&](std::size_t it) {
    thread_local std::vector<std::size_t> candidates;
    thread_local std::vector<unsigned char> scratch;
    RngStream rng = family.split(it);
    const auto target = static_cast<std::size_t>(rng.uniform_index(index.target_count()));
    sample_without_replacement(rng, index.impostor_count(target), cfg.n_impostors,
                               candidates, scratch);
    const auto& closest = index.pair(target, closest_candidate(index, target, candidates));
    const auto& random = index.pair(
        target, candidates[static_cast<std::size_t>(rng.uniform_index(candidates.size()))]);
    return Draw{closest.variance, random.variance, closest.pfa(tau), random.pfa(tau),
                closest.count > 1, random.count > 1};
  });

  double closest_sum = 0.0, random_sum = 0.0;
  std::size_t closest_n = 0, random_n = 0;
  for (const auto& d : draws) {
    r.closest_pfa += d.closest_pfa;
    r.random_pfa += d.random_pfa;
    if (d.closest_ok) {
      closest_sum += d.closest_var;
      ++closest_n;
    } else {
      ++r.variance_iterations_skipped;
    }
    if (d.random_ok) {
      random_sum += d.random_var;
      ++random_n;
    } else {
      ++r.variance_iterations_skipped;
    }
  }
  r.closest_pfa /= static_cast<double>(draws.size());
  r.random_pfa /= static_cast<double>(draws.size());
  r.closest_impostor_stdev =
      closest_n ? std::sqrt(closest_sum / static_cast<double>(closest_n)) : NAN;
  r.random_impostor_stdev =
      random_n ? std::sqrt(random_sum / static_cast<double>(random_n)) : NAN;
  return r;
}

nlohmann::json to_json(const DiagnosticsReport& r) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  auto finite = [](double v) -> nlohmann::json {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  };
  return {
      {"avg_pair_score_skewness", opt(r.mean_pair_skewness)},
      {"skewness_pairs_used", r.skewness_pairs_used},
      {"skewness_pairs_excluded", r.skewness_pairs_excluded},
      {"pair_mean_skewness", opt(r.pair_mean_skewness)},
      {"closest_impostor_stdev", finite(r.closest_impostor_stdev)},
      {"random_impostor_stdev", finite(r.random_impostor_stdev)},
      {"variance_iterations_skipped", r.variance_iterations_skipped},
      {"closest_impostor_pfa", r.closest_pfa},
      {"random_impostor_pfa", r.random_pfa},
      {"n_impostors", r.n_impostors},
      {"t_outer", r.t_outer},
      {"tau", r.tau},
  };
}

}  // namespace wcfa
