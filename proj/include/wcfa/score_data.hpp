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

#ifndef WCFA_SCORE_DATA_HPP_
#define WCFA_SCORE_DATA_HPP_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace wcfa {

struct ImpostorGroup {
  std::string impostor_id;
  std::vector<double> scores;

  bool operator==(const ImpostorGroup&) const = default;
};

struct TargetGroup {
  std::string target_id;
  std::vector<ImpostorGroup> impostors;
  std::optional<std::string> gender;

  bool operator==(const TargetGroup&) const = default;
};

/// Non-target scores grouped by (target, impostor). Targets and impostors are
/// ordered by id; scores keep input order.
struct TrialCorpus {
  std::vector<TargetGroup> targets;

  std::size_t target_count() const { return targets.size(); }
  std::size_t pair_count() const;
  std::size_t score_count() const;
  /// Smallest N_i over targets.
  std::size_t min_impostors() const;
  /// Throws ConfigError when any structural invariant is violated.
  void validate() const;
  /// Targets whose gender tag equals `tag`.
  TrialCorpus filter_gender(const std::string& tag) const;

  bool operator==(const TrialCorpus&) const = default;
};

struct LabeledScoreSet {
  std::vector<double> target_scores;
  std::vector<double> nontarget_scores;
};

enum class CorpusFormat { csv, jsonl };

CorpusFormat corpus_format_from_path(const std::filesystem::path& path);

TrialCorpus parse_corpus(std::istream& in, CorpusFormat format);
TrialCorpus load_corpus(const std::filesystem::path& path, CorpusFormat format);
/// Writes `target_id,impostor_id,score[,gender]` with 17 significant digits.
void write_corpus_csv(const TrialCorpus& corpus, std::ostream& out);

/// Labeled score CSV: header `label,score` plus an optional `tag` column;
/// label is `target` or `nontarget`. When `tag` is given, only rows with
/// that tag are kept.
LabeledScoreSet parse_labeled_scores(std::istream& in,
                                     const std::optional<std::string>& tag = {});
LabeledScoreSet load_labeled_scores(const std::filesystem::path& path,
                                    const std::optional<std::string>& tag = {});
void write_labeled_scores_csv(const LabeledScoreSet& set, std::ostream& out);

/// Adjusted Fisher-Pearson sample skewness; empty when n < 3 or the sample
/// variance is zero.
std::optional<double> sample_skewness(std::span<const double> xs);

struct PairMoments {
  std::size_t target = 0;
  std::size_t impostor = 0;
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // sample variance, n - 1; 0 when count == 1
  std::optional<double> skewness;
};

struct CorpusSummary {
  std::size_t targets = 0;
  std::size_t pairs = 0;
  std::size_t scores = 0;
  std::size_t min_impostors = 0, max_impostors = 0;
  double mean_impostors = 0.0;
  std::size_t min_scores_per_pair = 0, max_scores_per_pair = 0;
  double mean_scores_per_pair = 0.0;
  std::vector<PairMoments> pair_moments;
  /// Skewness of the per-pair means across the corpus.
  std::optional<double> pair_mean_skewness;
  /// Mean of per-pair skewness over pairs where it is defined.
  std::optional<double> mean_pair_skewness;
  /// Pairs excluded from skewness (fewer than 3 scores or zero variance).
  std::size_t skewness_excluded = 0;
};

CorpusSummary corpus_stats(const TrialCorpus& corpus);
/// `include_pairs` controls whether per-pair rows are emitted.
nlohmann::json to_json(const CorpusSummary& summary, bool include_pairs = false);

}  // namespace wcfa

#endif  // WCFA_SCORE_DATA_HPP_
