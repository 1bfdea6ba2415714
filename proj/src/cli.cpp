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

#include "wcfa/cli.hpp"

#include <omp.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "wcfa/error.hpp"
#include "wcfa/estimators.hpp"
#include "wcfa/format.hpp"
#include "wcfa/inference.hpp"
#include "wcfa/metrics.hpp"
#include "wcfa/model.hpp"
#include "wcfa/score_data.hpp"
#include "wcfa/synthetic.hpp"

namespace wcfa::cli {
namespace {

struct NamedThreshold {
  std::string label;
  double tau = 0.0;
};

// Options shared by the subcommands that need an operating threshold.
struct ThresholdOptions {
  std::optional<double> tau;
  std::string labels;
  std::string tag;
  std::vector<std::string> names;  // eer, minDCF1..3
  std::vector<double> dcf;         // p_target,c_miss,c_fa
  std::vector<std::string> manual;  // label=value

  void attach(CLI::App& app, bool many) {
    app.add_option("--tau", tau, "Decision threshold");
    app.add_option("--labels", labels, "Labeled score CSV (label,score[,tag])")
        ->check(CLI::ExistingFile);
    app.add_option("--tag", tag, "Use only labeled rows with this tag");
    auto* names_opt = app.add_option(
        "--threshold", names, "Threshold rule(s) on --labels: eer, minDCF1, minDCF2, minDCF3");
    names_opt->check(CLI::IsMember({"eer", "minDCF1", "minDCF2", "minDCF3"}));
    if (many) {
      names_opt->delimiter(',');
      app.add_option("--tau-spec", manual, "Manual threshold as label=value (repeatable)");
    } else {
      names_opt->expected(1);
    }
    app.add_option("--dcf", dcf, "Custom DCF parameters p_target,c_miss,c_fa")
        ->delimiter(',')
        ->expected(3);
  }

  std::vector<NamedThreshold> resolve() const {
    std::vector<NamedThreshold> out;
    if (tau) out.push_back({"manual", *tau});
    for (const auto& spec : manual) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos || eq == 0)
        throw ConfigError("--tau-spec expects label=value, got '" + spec + "'");
      out.push_back({spec.substr(0, eq), parse_number(spec.substr(eq + 1))});
    }
    if (!names.empty() || !dcf.empty()) {
      if (labels.empty())
        throw ConfigError("threshold rules need a labeled score file (--labels)");
      const auto set = load_labeled_scores(labels, tag.empty() ? std::nullopt
                                                               : std::optional(tag));
      for (const auto& name : names) {
        if (name == "eer") {
          out.push_back({name, eer_threshold(set).threshold.tau});
        } else {
          const DcfParams& p = name == "minDCF1"   ? kMinDcf1
                               : name == "minDCF2" ? kMinDcf2
                                                   : kMinDcf3;
          out.push_back({name, min_dcf_threshold(set, p).threshold.tau});
        }
      }
      if (!dcf.empty())
        out.push_back({"dcf", min_dcf_threshold(set, {dcf[0], dcf[1], dcf[2]}).threshold.tau});
    }
    if (out.empty())
      throw ConfigError("no threshold given: use --tau or --labels with --threshold/--dcf");
    for (const auto& t : out)
      if (!std::isfinite(t.tau)) throw ConfigError("threshold must be finite");
    return out;
  }

  static double parse_number(const std::string& text) {
    try {
      std::size_t used = 0;
      const double v = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("not a number: '" + text + "'");
    }
  }
};

// Writes to --out when given, else to the command's data stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ConfigError("cannot write '" + path + "'");
      stream_ = file_.get();
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

std::uint64_t default_seed() {
  if (const char* env = std::getenv(kSeedEnv)) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ConfigError(std::string(kSeedEnv) + " is not an unsigned integer");
    }
  }
  return 1;
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("invalid JSON in '" + path + "': " + e.what());
  }
}

void apply_overrides(Hyperparameters& h, const std::vector<std::string>& overrides) {
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--override expects name=value, got '" + item + "'");
    h.set(item.substr(0, eq), ThresholdOptions::parse_number(item.substr(eq + 1)));
  }
  h.validate();
}

TrialCorpus read_corpus(const std::string& path, const std::string& format,
                        const std::string& gender) {
  const CorpusFormat f = format.empty() ? corpus_format_from_path(path)
                         : format == "jsonl" ? CorpusFormat::jsonl
                                             : CorpusFormat::csv;
  TrialCorpus corpus = load_corpus(path, f);
  if (!gender.empty()) corpus = corpus.filter_gender(gender);
  corpus.validate();
  return corpus;
}

std::string estimate_cells(const EstimateWithCI& e) {
  return format_double(e.value) + "," + format_double(e.ci_low) + "," +
         format_double(e.ci_high);
}

Selection parse_selection(const std::string& s) {
  return s == "random" ? Selection::random : Selection::closest_by_mean;
}

struct Common {
  std::uint64_t seed = 0;
  std::size_t t_outer = 1000;
  double level = 0.99;
  std::string out;

  void attach(CLI::App& app, std::size_t default_t) {
    t_outer = default_t;
    app.add_option("--seed", seed, "Random seed (default: $WCFA_SEED or 1)");
    app.add_option("--t", t_outer, "Outer Monte-Carlo iterations")->capture_default_str();
    app.add_option("--level", level, "Confidence level")->capture_default_str();
    app.add_option("--out", out, "Write data to this file instead of stdout");
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Worst-case false alarm analysis for speaker verification scores", "wcfa"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP threads (0 keeps the runtime default)");

  std::uint64_t seed_default = 0;
  try {
    seed_default = default_seed();
  } catch (const Error& e) {
    err << "wcfa: " << e.what() << "\n";
    return kExitUserError;
  }

  // threshold
  auto* thr = app.add_subcommand("threshold", "Calibrate a threshold at EER or minDCF");
  std::string thr_labels, thr_tag, thr_out;
  bool thr_eer = false;
  int thr_mindcf = 0;
  std::vector<double> thr_dcf;
  thr->add_option("--labels", thr_labels, "Labeled score CSV")->required();
  thr->add_option("--tag", thr_tag, "Use only rows with this tag");
  auto* eer_flag = thr->add_flag("--eer", thr_eer, "Equal error rate threshold");
  auto* dcf_opt =
      thr->add_option("--dcf", thr_dcf, "DCF parameters p_target,c_miss,c_fa")
          ->delimiter(',')
          ->expected(3);
  auto* mindcf_opt = thr->add_option("--mindcf", thr_mindcf, "Preset cost set 1, 2 or 3")
                         ->check(CLI::Range(1, 3));
  eer_flag->excludes(dcf_opt)->excludes(mindcf_opt);
  dcf_opt->excludes(mindcf_opt);
  thr->add_option("--out", thr_out, "Write JSON to this file");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit model hyper-parameters by variational EM");
  std::string fit_corpus, fit_format, fit_init, fit_out, fit_trace, fit_gender;
  std::vector<std::string> fit_overrides;
  FitOptions fit_opts;
  fit_cmd->add_option("--corpus", fit_corpus, "Non-target score file")->required();
  fit_cmd->add_option("--format", fit_format, "csv or jsonl (default: by extension)")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  fit_cmd->add_option("--gender", fit_gender, "Keep only targets with this gender tag");
  fit_cmd->add_option("--init", fit_init, "Initial hyper-parameter JSON");
  fit_cmd->add_option("--override", fit_overrides, "Post-fit edits name=value")
      ->delimiter(',');
  fit_cmd->add_option("--max-iters", fit_opts.max_iterations, "Iteration limit")
      ->capture_default_str();
  fit_cmd->add_option("--tol", fit_opts.relative_tolerance, "Relative bound tolerance")
      ->capture_default_str();
  fit_cmd->add_option("--out", fit_out, "Write hyper-parameter JSON to this file");
  fit_cmd->add_option("--trace", fit_trace, "Write bound trace CSV to this file");

  // empirical
  auto* emp = app.add_subcommand("empirical", "Empirical P^N_FA from a score corpus");
  std::string emp_corpus, emp_format, emp_selection = "closest", emp_gender;
  std::vector<std::size_t> emp_n{1};
  bool emp_zero = false;
  Common emp_common;
  ThresholdOptions emp_thr;
  emp->add_option("--corpus", emp_corpus, "Non-target score file")->required();
  emp->add_option("--format", emp_format, "csv or jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  emp->add_option("--gender", emp_gender, "Keep only targets with this gender tag");
  emp->add_option("--n", emp_n, "Impostor population sizes")->delimiter(',');
  emp->add_option("--selection", emp_selection, "closest or random")
      ->check(CLI::IsMember({"closest", "random"}));
  emp->add_flag("--zero-effort", emp_zero, "Random single impostor per iteration");
  emp_common.attach(*emp, 1000);
  emp_thr.attach(*emp, false);

  // predict
  auto* pred = app.add_subcommand("predict", "Model-based P^N_FA from hyper-parameters");
  std::string pred_theta, pred_method = "sampling";
  std::vector<std::string> pred_overrides;
  std::vector<std::size_t> pred_n{1};
  std::size_t pred_len = kDefaultScoresPerPair;
  Common pred_common;
  ThresholdOptions pred_thr;
  pred->add_option("--theta", pred_theta, "Hyper-parameter JSON")->required();
  pred->add_option("--override", pred_overrides, "Edits name=value")->delimiter(',');
  pred->add_option("--n", pred_n, "Impostor population sizes")->delimiter(',');
  pred->add_option("--L", pred_len, "Scores per simulated pair")->capture_default_str();
  pred->add_option("--method", pred_method, "sampling or closed_form")
      ->check(CLI::IsMember({"sampling", "closed_form"}));
  pred_common.attach(*pred, 1000);
  pred_thr.attach(*pred, false);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic score corpus");
  std::string sim_spec, sim_out, sim_labels_out;
  std::optional<std::uint64_t> sim_seed;
  sim->add_option("--spec", sim_spec, "Spec JSON with mode model or toy_asv")
      ->required()
      ->check(CLI::ExistingFile);
  sim->add_option("--out", sim_out, "Corpus CSV output");
  sim->add_option("--labels-out", sim_labels_out, "Labeled score CSV output (toy_asv)");
  sim->add_option("--seed", sim_seed, "Override the spec seed");

  // curve
  auto* curve = app.add_subcommand("curve", "Empirical and model P^N_FA over N");
  std::string curve_corpus, curve_format, curve_theta, curve_method = "sampling",
                                                       curve_gender;
  std::vector<std::string> curve_overrides;
  std::vector<std::size_t> curve_n{1};
  std::optional<std::size_t> curve_len;
  Common curve_common;
  ThresholdOptions curve_thr;
  curve->add_option("--corpus", curve_corpus, "Non-target score file");
  curve->add_option("--format", curve_format, "csv or jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  curve->add_option("--gender", curve_gender, "Keep only targets with this gender tag");
  curve->add_option("--theta", curve_theta, "Hyper-parameter JSON (fit on corpus if absent)");
  curve->add_option("--override", curve_overrides, "Edits name=value")->delimiter(',');
  curve->add_option("--n", curve_n, "Ascending impostor population sizes")->delimiter(',');
  curve->add_option("--L", curve_len, "Scores per simulated pair");
  curve->add_option("--method", curve_method, "sampling or closed_form")
      ->check(CLI::IsMember({"sampling", "closed_form"}));
  curve_common.attach(*curve, 1000);
  curve_thr.attach(*curve, true);

  // diagnose
  auto* diag = app.add_subcommand("diagnose", "Model-mismatch diagnostics");
  std::string diag_corpus, diag_format, diag_gender;
  std::size_t diag_n = 1;
  Common diag_common;
  ThresholdOptions diag_thr;
  diag->add_option("--corpus", diag_corpus, "Non-target score file")->required();
  diag->add_option("--format", diag_format, "csv or jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  diag->add_option("--gender", diag_gender, "Keep only targets with this gender tag");
  diag->add_option("--n", diag_n, "Impostor population size for closest selection");
  diag_common.attach(*diag, 1000);
  diag_thr.attach(*diag, false);

  // stats
  auto* stats = app.add_subcommand("stats", "Corpus summary as JSON");
  std::string stats_corpus, stats_format, stats_out;
  bool stats_pairs = false;
  stats->add_option("--corpus", stats_corpus, "Non-target score file")->required();
  stats->add_option("--format", stats_format, "csv or jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  stats->add_flag("--pairs", stats_pairs, "Include per-pair moments");
  stats->add_option("--out", stats_out, "Write JSON to this file");

  for (auto* c : {emp, pred, curve, diag}) c->get_option("--seed")->default_val(seed_default);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUserError;
  }

  try {
    if (threads > 0) omp_set_num_threads(threads);

    if (*thr) {
      if (!thr_eer && thr_mindcf == 0 && thr_dcf.empty())
        throw ConfigError("threshold needs one of --eer, --dcf or --mindcf");
      const auto set =
          load_labeled_scores(thr_labels, thr_tag.empty() ? std::nullopt : std::optional(thr_tag));
      nlohmann::json j;
      if (thr_mindcf > 0 || !thr_dcf.empty()) {
        const DcfParams p = thr_mindcf == 1   ? kMinDcf1
                            : thr_mindcf == 2 ? kMinDcf2
                            : thr_mindcf == 3 ? kMinDcf3
                                              : DcfParams{thr_dcf[0], thr_dcf[1], thr_dcf[2]};
        const auto r = min_dcf_threshold(set, p);
        j = {{"tau", r.threshold.tau},
             {"metric", "min_dcf"},
             {"metric_value", r.min_dcf},
             {"provenance",
              {{"kind", "min_dcf"},
               {"p_target", p.p_target},
               {"c_miss", p.c_miss},
               {"c_fa", p.c_fa}}}};
      } else {
        const auto r = eer_threshold(set);
        j = {{"tau", r.threshold.tau},
             {"metric", "eer"},
             {"metric_value", r.eer},
             {"provenance", {{"kind", "eer"}}},
             {"degenerate", r.degenerate}};
      }
      Sink sink(thr_out, out);
      *sink << j.dump(2) << "\n";
      return kExitOk;
    }

    if (*fit_cmd) {
      const TrialCorpus corpus = read_corpus(fit_corpus, fit_format, fit_gender);
      std::optional<Hyperparameters> init;
      if (!fit_init.empty()) init = hyperparameters_from_json(read_json(fit_init));
      FitReport report = fit(corpus, init, fit_opts);
      apply_overrides(report.hyperparameters, fit_overrides);
      err << "fit: " << report.iterations << " iterations, "
          << (report.converged ? "converged" : "not converged") << ", final bound "
          << format_double(report.elbo_trace.back()) << "\n";
      if (!fit_trace.empty()) {
        Sink trace(fit_trace, out);
        *trace << "iteration,elbo\n";
        for (std::size_t k = 0; k < report.elbo_trace.size(); ++k)
          *trace << k << "," << format_double(report.elbo_trace[k]) << "\n";
      }
      Sink sink(fit_out, out);
      *sink << to_json(report.hyperparameters).dump(2) << "\n";
      return kExitOk;
    }

    if (*emp) {
      const TrialCorpus corpus = read_corpus(emp_corpus, emp_format, emp_gender);
      const double tau = emp_thr.resolve().front().tau;
      const CorpusIndex index(corpus);
      Sink sink(emp_common.out, out);
      *sink << "N,estimate,ci_low,ci_high\n";
      for (std::size_t n : emp_zero ? std::vector<std::size_t>{1} : emp_n) {
        EstimatorConfig cfg{emp_common.t_outer, n, emp_common.seed,
                            parse_selection(emp_selection), emp_common.level};
        const auto e = emp_zero ? estimate_pfa_zero_effort(index, tau, cfg)
                                : estimate_pfa_worst_case(index, tau, cfg);
        *sink << n << "," << estimate_cells(e) << "\n";
      }
      return kExitOk;
    }

    if (*pred) {
      Hyperparameters h = hyperparameters_from_json(read_json(pred_theta));
      apply_overrides(h, pred_overrides);
      const double tau = pred_thr.resolve().front().tau;
      PredictOptions opts;
      opts.scores_per_pair = pred_len;
      Sink sink(pred_common.out, out);
      *sink << "N,estimate,ci_low,ci_high\n";
      for (std::size_t n : pred_n) {
        EstimatorConfig cfg{pred_common.t_outer, n, pred_common.seed,
                            Selection::closest_by_mean, pred_common.level};
        const auto e = pred_method == "closed_form" ? predict_pfa_closed_form(h, tau, cfg, opts)
                                                    : predict_pfa_sampling(h, tau, cfg, opts);
        *sink << n << "," << estimate_cells(e) << "\n";
      }
      return kExitOk;
    }

    if (*sim) {
      const nlohmann::json spec = read_json(sim_spec);
      const std::string mode = spec.value("mode", "model");
      Sink sink(sim_out, out);
      if (mode == "model") {
        SyntheticSpec s = synthetic_spec_from_json(spec);
        if (sim_seed) s.seed = *sim_seed;
        write_corpus_csv(generate_model_corpus(s), *sink);
      } else if (mode == "toy_asv") {
        ToyAsvSpec s = toy_asv_spec_from_json(spec);
        if (sim_seed) s.seed = *sim_seed;
        const ToyAsvCorpus toy = generate_toy_asv_corpus(s);
        write_corpus_csv(toy.nontargets, *sink);
        if (!sim_labels_out.empty()) {
          Sink labels(sim_labels_out, out);
          write_labeled_scores_csv(toy.labeled, *labels);
        }
      } else {
        throw ConfigError("spec mode must be 'model' or 'toy_asv'");
      }
      return kExitOk;
    }

    if (*curve) {
      for (std::size_t k = 1; k < curve_n.size(); ++k)
        if (curve_n[k] < curve_n[k - 1]) throw ConfigError("--n must be ascending");
      if (curve_corpus.empty() && curve_theta.empty())
        throw ConfigError("curve needs --corpus, --theta, or both");
      const auto thresholds = curve_thr.resolve();
      std::optional<TrialCorpus> corpus;
      std::optional<CorpusIndex> index;
      if (!curve_corpus.empty()) {
        corpus = read_corpus(curve_corpus, curve_format, curve_gender);
        index.emplace(*corpus);
      }
      Hyperparameters h;
      if (!curve_theta.empty()) {
        h = hyperparameters_from_json(read_json(curve_theta));
      } else {
        const FitReport report = fit(*corpus);
        err << "curve: fitted hyper-parameters in " << report.iterations << " iterations\n";
        h = report.hyperparameters;
      }
      apply_overrides(h, curve_overrides);
      PredictOptions opts;
      if (curve_len) {
        opts.scores_per_pair = *curve_len;
      } else if (corpus) {
        opts.scores_per_pair = static_cast<std::size_t>(std::llround(
            static_cast<double>(corpus->score_count()) / static_cast<double>(corpus->pair_count())));
      }

      Sink sink(curve_common.out, out);
      *sink << "N,tau_label,tau,source,estimate,ci_low,ci_high\n";
      for (std::size_t n : curve_n) {
        for (const auto& t : thresholds) {
          EstimatorConfig cfg{curve_common.t_outer, n, curve_common.seed,
                              Selection::closest_by_mean, curve_common.level};
          const std::string prefix =
              std::to_string(n) + "," + t.label + "," + format_double(t.tau) + ",";
          if (index) {
            *sink << prefix << "empirical,";
            if (n <= index->min_impostors())
              *sink << estimate_cells(estimate_pfa_worst_case(*index, t.tau, cfg));
            else
              *sink << ",,";
            *sink << "\n";
          }
          const auto e = curve_method == "closed_form"
                             ? predict_pfa_closed_form(h, t.tau, cfg, opts)
                             : predict_pfa_sampling(h, t.tau, cfg, opts);
          *sink << prefix << "model," << estimate_cells(e) << "\n";
        }
      }
      return kExitOk;
    }

    if (*diag) {
      const TrialCorpus corpus = read_corpus(diag_corpus, diag_format, diag_gender);
      const double tau = diag_thr.resolve().front().tau;
      EstimatorConfig cfg{diag_common.t_outer, diag_n, diag_common.seed,
                          Selection::closest_by_mean, diag_common.level};
      Sink sink(diag_common.out, out);
      *sink << to_json(diagnose(corpus, tau, cfg)).dump(2) << "\n";
      return kExitOk;
    }

    if (*stats) {
      const TrialCorpus corpus = read_corpus(stats_corpus, stats_format, "");
      Sink sink(stats_out, out);
      *sink << to_json(corpus_stats(corpus), stats_pairs).dump(2) << "\n";
      return kExitOk;
    }
  } catch (const NumericError& e) {
    err << "wcfa: numeric error: " << e.what() << "\n";
    return kExitNumericError;
  } catch (const Error& e) {
    err << "wcfa: " << e.what() << "\n";
    return kExitUserError;
  } catch (const nlohmann::json::exception& e) {
    err << "wcfa: " << e.what() << "\n";
    return kExitUserError;
  }
  return kExitUserError;
}

}  // namespace wcfa::cli
