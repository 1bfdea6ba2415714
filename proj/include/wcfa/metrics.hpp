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

#ifndef WCFA_METRICS_HPP_
#define WCFA_METRICS_HPP_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wcfa/score_data.hpp"

namespace wcfa {

struct DcfParams {
  double p_target = 0.5;
  double c_miss = 1.0;
  double c_fa = 1.0;
  void validate() const;
};

/// Cost settings of the three operating points used for worst-case
/// false-alarm curves: miss-heavy, balanced, false-alarm-heavy.
inline constexpr DcfParams kMinDcf1{0.5, 10.0, 1.0};
inline constexpr DcfParams kMinDcf2{0.5, 1.0, 1.0};
inline constexpr DcfParams kMinDcf3{0.5, 1.0, 10.0};

enum class ThresholdKind { eer, min_dcf, manual };

struct ThresholdSpec {
  double tau = 0.0;
  ThresholdKind kind = ThresholdKind::manual;
  std::optional<DcfParams> dcf;  // set when kind == min_dcf
};

std::string to_string(ThresholdKind kind);

/// Fraction of scores strictly above tau.
double empirical_pfa(std::span<const double> nontarget_scores, double tau);
/// Fraction of scores at or below tau.
double empirical_pmiss(std::span<const double> target_scores, double tau);

/// Candidate operating points: midpoints of adjacent distinct merged scores,
/// plus one sentinel below the minimum and one above the maximum.
std::vector<double> candidate_thresholds(const LabeledScoreSet& set);

struct EerResult {
  ThresholdSpec threshold;
  double eer = 0.0;
  bool degenerate = false;  // every score identical
};

EerResult eer_threshold(const LabeledScoreSet& set);

/// Normalized detection cost at tau:
///   (p c_miss P_miss + (1 - p) c_fa P_fa) / min(p c_miss, (1 - p) c_fa).
double normalized_dcf(const LabeledScoreSet& set, const DcfParams& params, double tau);

struct DcfResult {
  ThresholdSpec threshold;
  double min_dcf = 0.0;
};

DcfResult min_dcf_threshold(const LabeledScoreSet& set, const DcfParams& params);

}  // namespace wcfa

#endif  // WCFA_METRICS_HPP_
