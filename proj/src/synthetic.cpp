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

#include "wcfa/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "wcfa/error.hpp"
#include "wcfa/parallel.hpp"

namespace wcfa {
namespace {

int id_width(std::size_t count) {
  int digits = 1;
  for (std::size_t c = count; c >= 10; c /= 10) ++digits;
  return std::max(digits, 4);
}

std::string padded(std::size_t value, int width) {
  std::string s = std::to_string(value);
  if (static_cast<int>(s.size()) < width)
    s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  return s;
}

template <class T>
T field_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

void SyntheticSpec::validate() const {
  theta.validate();
  if (t_targets < 1 || n_impostors_per_target < 1 || l_scores_per_pair < 1)
    throw ConfigError("synthetic spec counts must be at least 1");
}

void ToyAsvSpec::validate() const {
  if (embedding_dim < 1 || n_speakers < 2)
    throw ConfigError("toy ASV spec needs embedding_dim >= 1 and at least 2 speakers");
  if (n_utts_per_speaker < 2)
    throw ConfigError("toy ASV spec needs at least 2 utterances per speaker to form "
                      "target trials");
  if (!(speaker_spread > 0.0) || !(utterance_noise > 0.0) ||
      !std::isfinite(speaker_spread) || !std::isfinite(utterance_noise))
    throw ConfigError("toy ASV spreads must be finite and positive");
}

TrialCorpus generate_model_corpus(const SyntheticSpec& spec) {
  spec.validate();
  const int tw = id_width(spec.t_targets);
  const int iw = id_width(spec.n_impostors_per_target);
  const RngStream family(spec.seed, 21);
  TrialCorpus corpus;
  corpus.targets.resize(spec.t_targets);
  indexed_for(spec.t_targets, Execution::parallel, [&](std::size_t i) {
    RngStream rng = family.split(i);
    const TargetDraw t = sample_target(spec.theta, rng);
    TargetGroup& group = corpus.targets[i];
    group.target_id = "t" + padded(i + 1, tw);
    group.impostors.resize(spec.n_impostors_per_target);
    for (std::size_t j = 0; j < spec.n_impostors_per_target; ++j) {
      const PairDraw p = sample_pair(t, rng);
      group.impostors[j].impostor_id = "i" + padded(i + 1, tw) + "_" + padded(j + 1, iw);
      group.impostors[j].scores = sample_scores(t, p, spec.l_scores_per_pair, rng);
    }
  });
  return corpus;
}

ToyAsvCorpus generate_toy_asv_corpus(const ToyAsvSpec& spec) {
  spec.validate();
  const std::size_t d = spec.embedding_dim;
  const std::size_t n_spk = spec.n_speakers;
  const std::size_t n_utt = spec.n_utts_per_speaker;
  const RngStream family(spec.seed, 22);

  // utterances[s * n_utt + u] is a d-vector.
  std::vector<double> utts(n_spk * n_utt * d);
  indexed_for(n_spk, Execution::parallel, [&](std::size_t s) {
    RngStream rng = family.split(s);
    std::vector<double> y(d);
    for (double& v : y) v = spec.speaker_spread * rng.standard_normal();
    for (std::size_t u = 0; u < n_utt; ++u) {
      double* x = &utts[(s * n_utt + u) * d];
      for (std::size_t k = 0; k < d; ++k)
        x[k] = y[k] + spec.utterance_noise * rng.standard_normal();
    }
  });

  const double inv_norm = 1.0 / (2.0 * static_cast<double>(d));
  auto score = [&](std::size_t a, std::size_t b) {
    const double* xa = &utts[a * d];
    const double* xb = &utts[b * d];
    double dist = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double diff = xa[k] - xb[k];
      dist += diff * diff;
    }
    return spec.score_offset - dist * inv_norm;
  };

  const int w = id_width(n_spk);
  auto speaker_id = [&](std::size_t s) { return "spk" + padded(s + 1, w); };

  ToyAsvCorpus out;
  out.nontargets.targets.resize(n_spk);
  indexed_for(n_spk, Execution::parallel, [&](std::size_t e) {
    TargetGroup& group = out.nontargets.targets[e];
    group.target_id = speaker_id(e);
    group.impostors.reserve(n_spk - 1);
    for (std::size_t t = 0; t < n_spk; ++t) {
      if (t == e) continue;
      ImpostorGroup imp{speaker_id(t), {}};
      imp.scores.reserve(n_utt * n_utt);
      for (std::size_t ue = 0; ue < n_utt; ++ue)
        for (std::size_t ut = 0; ut < n_utt; ++ut)
          imp.scores.push_back(score(e * n_utt + ue, t * n_utt + ut));
      group.impostors.push_back(std::move(imp));
    }
  });

  for (std::size_t s = 0; s < n_spk; ++s)
    for (std::size_t a = 0; a < n_utt; ++a)
      for (std::size_t b = a + 1; b < n_utt; ++b)
        out.labeled.target_scores.push_back(score(s * n_utt + a, s * n_utt + b));
  for (std::size_t e = 0; e < n_spk; ++e)
    for (std::size_t t = e + 1; t < n_spk; ++t)
      for (double s : out.nontargets.targets[e].impostors[t - 1].scores)
        out.labeled.nontarget_scores.push_back(s);
  return out;
}

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("theta"))
    throw ConfigError("model spec needs a 'theta' object");
  SyntheticSpec s;
  s.theta = hyperparameters_from_json(j.at("theta"));
  s.t_targets = field_or<std::size_t>(j, "t_targets", s.t_targets);
  s.n_impostors_per_target =
      field_or<std::size_t>(j, "n_impostors_per_target", s.n_impostors_per_target);
  s.l_scores_per_pair = field_or<std::size_t>(j, "l_scores_per_pair", s.l_scores_per_pair);
  s.seed = field_or<std::uint64_t>(j, "seed", s.seed);
  s.validate();
  return s;
}

ToyAsvSpec toy_asv_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("toy ASV spec must be a JSON object");
  ToyAsvSpec s;
  s.embedding_dim = field_or<std::size_t>(j, "embedding_dim", s.embedding_dim);
  s.speaker_spread = field_or<double>(j, "speaker_spread", s.speaker_spread);
  s.utterance_noise = field_or<double>(j, "utterance_noise", s.utterance_noise);
  s.n_speakers = field_or<std::size_t>(j, "n_speakers", s.n_speakers);
  s.n_utts_per_speaker = field_or<std::size_t>(j, "n_utts_per_speaker", s.n_utts_per_speaker);
  s.score_offset = field_or<double>(j, "score_offset", s.score_offset);
  s.seed = field_or<std::uint64_t>(j, "seed", s.seed);
  s.validate();
  return s;
}

}  // namespace wcfa
