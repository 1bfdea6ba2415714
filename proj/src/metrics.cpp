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

#include "wcfa/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "wcfa/error.hpp"

namespace wcfa {
namespace {

void require_scores(const LabeledScoreSet& set) {
  if (set.target_scores.empty() || set.nontarget_scores.empty())
    throw DomainError("threshold calibration needs target and nontarget scores");
}

// Error rates evaluated on pre-sorted score lists.
struct SortedScores {
  std::vector<double> targets;
  std::vector<double> nontargets;

  explicit SortedScores(const LabeledScoreSet& set)
      : targets(set.target_scores), nontargets(set.nontarget_scores) {
    std::sort(targets.begin(), targets.end());
    std::sort(nontargets.begin(), nontargets.end());
  }

  double pfa(double tau) const {
    const auto above = nontargets.end() -
                       std::upper_bound(nontargets.begin(), nontargets.end(), tau);
    return static_cast<double>(above) / static_cast<double>(nontargets.size());
  }
  double pmiss(double tau) const {
    const auto at_or_below =
        std::upper_bound(targets.begin(), targets.end(), tau) - targets.begin();
    return static_cast<double>(at_or_below) / static_cast<double>(targets.size());
  }
};

double dcf_normalizer(const DcfParams& p) {
  return std::min(p.p_target * p.c_miss, (1.0 - p.p_target) * p.c_fa);
}

double dcf_at(const SortedScores& s, const DcfParams& p, double tau) {
  const double cost = p.p_target * p.c_miss * s.pmiss(tau) +
                      (1.0 - p.p_target) * p.c_fa * s.pfa(tau);
  return cost / dcf_normalizer(p);
}

}  // namespace

void DcfParams::validate() const {
  if (!(p_target > 0.0 && p_target < 1.0))
    throw DomainError("p_target must lie in (0, 1)");
  if (!(c_miss > 0.0 && std::isfinite(c_miss)) || !(c_fa > 0.0 && std::isfinite(c_fa)))
    throw DomainError("DCF costs must be positive and finite");
}

std::string to_string(ThresholdKind kind) {
  switch (kind) {
    case ThresholdKind::eer: return "eer";
    case ThresholdKind::min_dcf: return "min_dcf";
    case ThresholdKind::manual: return "manual";
  }
  return "manual";
}

double empirical_pfa(std::span<const double> nontarget_scores, double tau) {
  if (nontarget_scores.empty()) throw DomainError("empirical_pfa: no scores");
  if (std::isnan(tau)) throw DomainError("empirical_pfa: tau is NaN");
  std::size_t above = 0;
  for (double s : nontarget_scores) above += s > tau ? 1 : 0;
  return static_cast<double>(above) / static_cast<double>(nontarget_scores.size());
}

double empirical_pmiss(std::span<const double> target_scores, double tau) {
  if (target_scores.empty()) throw DomainError("empirical_pmiss: no scores");
  if (std::isnan(tau)) throw DomainError("empirical_pmiss: tau is NaN");
  std::size_t below = 0;
  for (double s : target_scores) below += s <= tau ? 1 : 0;
  return static_cast<double>(below) / static_cast<double>(target_scores.size());
}

std::vector<double> candidate_thresholds(const LabeledScoreSet& set) {
  require_scores(set);
  std::vector<double> merged;
  merged.reserve(set.target_scores.size() + set.nontarget_scores.size());
  merged.insert(merged.end(), set.target_scores.begin(), set.target_scores.end());
  merged.insert(merged.end(), set.nontarget_scores.begin(), set.nontarget_scores.end());
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

  std::vector<double> out;
  out.reserve(merged.size() + 1);
  out.push_back(merged.front() - 1.0);
  for (std::size_t k = 0; k + 1 < merged.size(); ++k)
    out.push_back(merged[k] + 0.5 * (merged[k + 1] - merged[k]));
  out.push_back(merged.back() + 1.0);
  return out;
}

EerResult eer_threshold(const LabeledScoreSet& set) {
  require_scores(set);
  const SortedScores sorted(set);
  const double lo = std::min(sorted.targets.front(), sorted.nontargets.front());
  const double hi = std::max(sorted.targets.back(), sorted.nontargets.back());
  if (lo == hi) {
    const double pfa = sorted.pfa(lo), pmiss = sorted.pmiss(lo);
    return {{lo, ThresholdKind::eer, std::nullopt}, 0.5 * (pfa + pmiss), true};
  }
  // Candidates ascend, so keeping only strict improvements breaks ties toward
  // the smaller threshold.
  double best_tau = 0.0, best_gap = INFINITY, best_eer = 0.0;
  for (double tau : candidate_thresholds(set)) {
    const double pfa = sorted.pfa(tau), pmiss = sorted.pmiss(tau);
    const double gap = std::abs(pfa - pmiss);
    if (gap < best_gap) {
      best_gap = gap;
      best_tau = tau;
      best_eer = 0.5 * (pfa + pmiss);
    }
  }
  return {{best_tau, ThresholdKind::eer, std::nullopt}, best_eer, false};
}

double normalized_dcf(const LabeledScoreSet& set, const DcfParams& params, double tau) {
  require_scores(set);
  params.validate();
  return dcf_at(SortedScores(set), params, tau);
}

DcfResult min_dcf_threshold(const LabeledScoreSet& set, const DcfParams& params) {
  require_scores(set);
  params.validate();
  const SortedScores sorted(set);
  double best_tau = 0.0, best = INFINITY;
  for (double tau : candidate_thresholds(set)) {
    const double v = dcf_at(sorted, params, tau);
    if (v < best) {
      best = v;
      best_tau = tau;
    }
  }
  return {{best_tau, ThresholdKind::min_dcf, params}, best};
}

}  // namespace wcfa
