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

#ifndef WCFA_SYNTHETIC_HPP_
#define WCFA_SYNTHETIC_HPP_

#include <cstddef>
#include <cstdint>
#include <utility>

#include "json.hpp"
#include "wcfa/model.hpp"
#include "wcfa/score_data.hpp"

namespace wcfa {

struct SyntheticSpec {
  Hyperparameters theta;
  std::size_t t_targets = 1;
  std::size_t n_impostors_per_target = 1;
  std::size_t l_scores_per_pair = 1;
  std::uint64_t seed = 0;
  void validate() const;
};

/// Isotropic toy verification system: speakers y ~ N(0, spread^2 I_d),
/// utterances x ~ N(y, noise^2 I_d), score(x, x') = offset - |x - x'|^2 / (2d).
struct ToyAsvSpec {
  std::size_t embedding_dim = 64;
  double speaker_spread = 1.0;
  double utterance_noise = 0.5;
  std::size_t n_speakers = 200;
  std::size_t n_utts_per_speaker = 10;
  double score_offset = 0.0;
  std::uint64_t seed = 0;
  void validate() const;
};

/// Scores drawn straight from the hierarchy. Target ids are "t0001", ...;
/// impostor ids "i0001_0002" (target 1, impostor 2), zero-padded to at least
/// four digits so lexical order equals generation order.
TrialCorpus generate_model_corpus(const SyntheticSpec& spec);

struct ToyAsvCorpus {
  /// Every ordered pair of distinct speakers, all n_utts^2 cross scores.
  TrialCorpus nontargets;
  /// Same-speaker scores over distinct utterance pairs, and one copy of every
  /// unordered cross-speaker score.
  LabeledScoreSet labeled;
};

ToyAsvCorpus generate_toy_asv_corpus(const ToyAsvSpec& spec);

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);
ToyAsvSpec toy_asv_spec_from_json(const nlohmann::json& j);

}  // namespace wcfa

#endif  // WCFA_SYNTHETIC_HPP_
