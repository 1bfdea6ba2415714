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

#include "wcfa/score_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string_view>

#include "wcfa/error.hpp"
#include "wcfa/format.hpp"

namespace wcfa {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_score(std::string_view text, std::size_t line) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  if (!text.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || text.empty())
    throw ParseError("cannot parse score '" + std::string(text) + "'", line);
  if (!std::isfinite(value))
    throw ParseError("non-finite score '" + std::string(text) + "'", line);
  return value;
}

struct Row {
  std::string target;
  std::string impostor;
  double score;
  std::optional<std::string> gender;
};

class CorpusBuilder {
 public:
  void add(Row row, std::size_t line) {
    if (row.target.empty() || row.impostor.empty())
      throw ParseError("empty speaker id", line);
    if (row.target == row.impostor)
      throw ParseError("target and impostor ids are identical ('" + row.target +
                           "')",
                       line);
    auto& entry = targets_[row.target];
    if (row.gender) {
      if (entry.gender && *entry.gender != *row.gender)
        throw ParseError("conflicting gender tags for target '" + row.target + "'",
                         line);
      entry.gender = row.gender;
    }
    entry.impostors[row.impostor].push_back(row.score);
    ++rows_;
  }

  TrialCorpus finish() && {
    if (rows_ == 0) throw ParseError("no score rows", 0);
    TrialCorpus corpus;
    corpus.targets.reserve(targets_.size());
    for (auto& [target_id, entry] : targets_) {
      TargetGroup group{target_id, {}, entry.gender};
      group.impostors.reserve(entry.impostors.size());
      for (auto& [impostor_id, scores] : entry.impostors)
        group.impostors.push_back({impostor_id, std::move(scores)});
      corpus.targets.push_back(std::move(group));
    }
    return corpus;
  }

 private:
  struct Entry {
    std::optional<std::string> gender;
    std::map<std::string, std::vector<double>> impostors;
  };
  std::map<std::string, Entry> targets_;
  std::size_t rows_ = 0;
};

std::size_t column_index(const std::vector<std::string_view>& header,
                         std::string_view name, bool required) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    if (required) throw ParseError("missing column '" + std::string(name) + "'", 1);
    return std::string_view::npos;
  }
  return static_cast<std::size_t>(it - header.begin());
}

TrialCorpus parse_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header_storage;
  std::vector<std::string_view> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw ParseError("empty file", 0);
  for (auto f : split_csv(line)) header_storage.emplace_back(f);
  for (const auto& f : header_storage) header.emplace_back(f);
  const std::size_t t_col = column_index(header, "target_id", true);
  const std::size_t i_col = column_index(header, "impostor_id", true);
  const std::size_t s_col = column_index(header, "score", true);
  const std::size_t g_col = column_index(header, "gender", false);

  CorpusBuilder builder;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    Row row{std::string(fields[t_col]), std::string(fields[i_col]),
            parse_score(fields[s_col], line_no), std::nullopt};
    if (g_col != std::string_view::npos && !fields[g_col].empty())
      row.gender = std::string(fields[g_col]);
    builder.add(std::move(row), line_no);
  }
  return std::move(builder).finish();
}

TrialCorpus parse_jsonl(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  CorpusBuilder builder;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!obj.is_object()) throw ParseError("expected a JSON object", line_no);
    for (const char* key : {"target", "impostor", "score"})
      if (!obj.contains(key))
        throw ParseError(std::string("missing field '") + key + "'", line_no);
    if (!obj["target"].is_string() || !obj["impostor"].is_string())
      throw ParseError("speaker ids must be strings", line_no);
    const auto& score = obj["score"];
    double value = 0.0;
    if (score.is_number()) {
      value = score.get<double>();
    } else if (score.is_string()) {
      value = parse_score(trim(score.get_ref<const std::string&>()), line_no);
    } else {
      throw ParseError("score must be a number", line_no);
    }
    if (!std::isfinite(value)) throw ParseError("non-finite score", line_no);
    Row row{obj["target"].get<std::string>(), obj["impostor"].get<std::string>(),
            value, std::nullopt};
    if (obj.contains("gender") && obj["gender"].is_string())
      row.gender = obj["gender"].get<std::string>();
    builder.add(std::move(row), line_no);
  }
  return std::move(builder).finish();
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'", 0);
  return in;
}

}  // namespace

std::size_t TrialCorpus::pair_count() const {
  std::size_t n = 0;
  for (const auto& t : targets) n += t.impostors.size();
  return n;
}

std::size_t TrialCorpus::score_count() const {
  std::size_t n = 0;
  for (const auto& t : targets)
    for (const auto& g : t.impostors) n += g.scores.size();
  return n;
}

std::size_t TrialCorpus::min_impostors() const {
  std::size_t n = targets.empty() ? 0 : targets.front().impostors.size();
  for (const auto& t : targets) n = std::min(n, t.impostors.size());
  return n;
}

void TrialCorpus::validate() const {
  if (targets.empty()) throw ConfigError("corpus has no targets");
  std::set<std::string_view> target_ids;
  for (const auto& t : targets) {
    if (!target_ids.insert(t.target_id).second)
      throw ConfigError("duplicate target id '" + t.target_id + "'");
    if (t.impostors.empty())
      throw ConfigError("target '" + t.target_id + "' has no impostors");
    std::set<std::string_view> impostor_ids;
    for (const auto& g : t.impostors) {
      if (g.impostor_id == t.target_id)
        throw ConfigError("target '" + t.target_id + "' lists itself as impostor");
      if (!impostor_ids.insert(g.impostor_id).second)
        throw ConfigError("duplicate impostor '" + g.impostor_id + "' for target '" +
                          t.target_id + "'");
      if (g.scores.empty())
        throw ConfigError("pair (" + t.target_id + ", " + g.impostor_id +
                          ") has no scores");
      for (double s : g.scores)
        if (!std::isfinite(s))
          throw ConfigError("non-finite score in pair (" + t.target_id + ", " +
                            g.impostor_id + ")");
    }
  }
}

TrialCorpus TrialCorpus::filter_gender(const std::string& tag) const {
  TrialCorpus out;
  for (const auto& t : targets)
    if (t.gender && *t.gender == tag) out.targets.push_back(t);
  if (out.targets.empty())
    throw ConfigError("no targets carry gender tag '" + tag + "'");
  return out;
}

CorpusFormat corpus_format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".jsonl" || ext == ".json") return CorpusFormat::jsonl;
  return CorpusFormat::csv;
}

TrialCorpus parse_corpus(std::istream& in, CorpusFormat format) {
  return format == CorpusFormat::csv ? parse_csv(in) : parse_jsonl(in);
}

TrialCorpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  auto in = open_input(path);
  return parse_corpus(in, format);
}

void write_corpus_csv(const TrialCorpus& corpus, std::ostream& out) {
  bool with_gender = false;
  for (const auto& t : corpus.targets) with_gender |= t.gender.has_value();
  out << (with_gender ? "target_id,impostor_id,score,gender\n"
                      : "target_id,impostor_id,score\n");
  for (const auto& t : corpus.targets)
    for (const auto& g : t.impostors)
      for (double s : g.scores) {
        out << t.target_id << ',' << g.impostor_id << ',' << format_double(s);
        if (with_gender) out << ',' << t.gender.value_or("");
        out << '\n';
      }
}

LabeledScoreSet parse_labeled_scores(std::istream& in,
                                     const std::optional<std::string>& tag) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw ParseError("empty file", 0);
  std::vector<std::string> header_storage;
  for (auto f : split_csv(line)) header_storage.emplace_back(f);
  const std::vector<std::string_view> header(header_storage.begin(),
                                             header_storage.end());
  const std::size_t l_col = column_index(header, "label", true);
  const std::size_t s_col = column_index(header, "score", true);
  const std::size_t t_col = column_index(header, "tag", false);
  if (tag && t_col == std::string_view::npos)
    throw ParseError("tag filter requested but file has no 'tag' column", 1);

  LabeledScoreSet set;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    const double score = parse_score(fields[s_col], line_no);
    if (tag && fields[t_col] != *tag) continue;
    if (fields[l_col] == "target") {
      set.target_scores.push_back(score);
    } else if (fields[l_col] == "nontarget") {
      set.nontarget_scores.push_back(score);
    } else {
      throw ParseError("label must be 'target' or 'nontarget'", line_no);
    }
  }
  if (set.target_scores.empty() || set.nontarget_scores.empty())
    throw ParseError("labeled score file needs both target and nontarget rows", 0);
  return set;
}

LabeledScoreSet load_labeled_scores(const std::filesystem::path& path,
                                    const std::optional<std::string>& tag) {
  auto in = open_input(path);
  return parse_labeled_scores(in, tag);
}

void write_labeled_scores_csv(const LabeledScoreSet& set, std::ostream& out) {
  out << "label,score\n";
  for (double s : set.target_scores) out << "target," << format_double(s) << '\n';
  for (double s : set.nontarget_scores)
    out << "nontarget," << format_double(s) << '\n';
}

std::optional<double> sample_skewness(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 3) return std::nullopt;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double m2 = 0.0, m3 = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  if (!(m2 > 0.0)) return std::nullopt;
  const double g1 = m3 / std::pow(m2, 1.5);
  const double dn = static_cast<double>(n);
  return g1 * std::sqrt(dn * (dn - 1.0)) / (dn - 2.0);
}

CorpusSummary corpus_stats(const TrialCorpus& corpus) {
  CorpusSummary s;
  s.targets = corpus.target_count();
  s.pairs = corpus.pair_count();
  s.scores = corpus.score_count();
  if (s.targets == 0) return s;
  s.min_impostors = s.max_impostors = corpus.targets.front().impostors.size();
  s.min_scores_per_pair = s.max_scores_per_pair =
      corpus.targets.front().impostors.front().scores.size();

  std::vector<double> means;
  means.reserve(s.pairs);
  double skew_sum = 0.0;
  std::size_t skew_count = 0;
  for (std::size_t i = 0; i < corpus.targets.size(); ++i) {
    const auto& t = corpus.targets[i];
    s.min_impostors = std::min(s.min_impostors, t.impostors.size());
    s.max_impostors = std::max(s.max_impostors, t.impostors.size());
    for (std::size_t j = 0; j < t.impostors.size(); ++j) {
      const auto& scores = t.impostors[j].scores;
      const std::size_t n = scores.size();
      s.min_scores_per_pair = std::min(s.min_scores_per_pair, n);
      s.max_scores_per_pair = std::max(s.max_scores_per_pair, n);
      PairMoments pm{i, j, n, 0.0, 0.0, std::nullopt};
      for (double x : scores) pm.mean += x;
      pm.mean /= static_cast<double>(n);
      if (n > 1) {
        for (double x : scores) pm.variance += (x - pm.mean) * (x - pm.mean);
        pm.variance /= static_cast<double>(n - 1);
      }
      pm.skewness = sample_skewness(scores);
      if (pm.skewness) {
        skew_sum += *pm.skewness;
        ++skew_count;
      } else {
        ++s.skewness_excluded;
      }
      means.push_back(pm.mean);
      s.pair_moments.push_back(pm);
    }
  }
  s.mean_impostors = static_cast<double>(s.pairs) / static_cast<double>(s.targets);
  s.mean_scores_per_pair =
      static_cast<double>(s.scores) / static_cast<double>(s.pairs);
  s.pair_mean_skewness = sample_skewness(means);
  if (skew_count > 0) s.mean_pair_skewness = skew_sum / static_cast<double>(skew_count);
  return s;
}

nlohmann::json to_json(const CorpusSummary& s, bool include_pairs) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::json j = {
      {"targets", s.targets},
      {"pairs", s.pairs},
      {"scores", s.scores},
      {"impostors_per_target",
       {{"min", s.min_impostors}, {"max", s.max_impostors}, {"mean", s.mean_impostors}}},
      {"scores_per_pair",
       {{"min", s.min_scores_per_pair},
        {"max", s.max_scores_per_pair},
        {"mean", s.mean_scores_per_pair}}},
      {"pair_mean_skewness", opt(s.pair_mean_skewness)},
      {"mean_pair_skewness", opt(s.mean_pair_skewness)},
      {"skewness_excluded", s.skewness_excluded},
  };
  if (include_pairs) {
    auto rows = nlohmann::json::array();
    for (const auto& p : s.pair_moments)
      rows.push_back({{"target", p.target},
                      {"impostor", p.impostor},
                      {"count", p.count},
                      {"mean", p.mean},
                      {"variance", p.variance},
                      {"skewness", opt(p.skewness)}});
    j["pair_moments"] = std::move(rows);
  }
  return j;
}

}  // namespace wcfa
