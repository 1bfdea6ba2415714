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


#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "wcfa/cli.hpp"
#include "wcfa/metrics.hpp"
#include "wcfa/score_data.hpp"
#include "wcfa/synthetic.hpp"

using namespace wcfa;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class Workspace {
 public:
  Workspace() {
    std::random_device rd;
    dir_ = fs::temp_directory_path() / ("wcfa_cli_" + std::to_string(rd()));
    fs::create_directories(dir_);
  }
  ~Workspace() { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

 private:
  fs::path dir_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), {}};
}

const char* kTheta =
    R"({"mu0": 0, "sigma0_sq": 1, "a_sigma": 6, "b_sigma": 5, "alpha_lambda": 4, "beta_lambda": 2})";

std::string model_spec_json(int targets, int impostors, int scores, int seed) {
  return std::string(R"({"mode": "model", "theta": )") + kTheta +
         ", \"t_targets\": " + std::to_string(targets) +
         ", \"n_impostors_per_target\": " + std::to_string(impostors) +
         ", \"l_scores_per_pair\": " + std::to_string(scores) +
         ", \"seed\": " + std::to_string(seed) + "}";
}

// Simulates a toy system and returns (corpus path, labels path).
std::pair<std::string, std::string> toy_files(const Workspace& ws) {
  const auto spec = ws.write(
      "toy.json",
      R"({"mode": "toy_asv", "embedding_dim": 8, "n_speakers": 25, "n_utts_per_speaker": 4, "seed": 3})");
  const auto corpus = ws.path("toy.csv"), labels = ws.path("toy_labels.csv");
  REQUIRE(run({"simulate", "--spec", spec, "--out", corpus, "--labels-out", labels}).code == 0);
  return {corpus, labels};
}

int exit_status(const std::string& command) {
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("threshold") {
  Workspace ws;
  const auto [corpus, labels] = toy_files(ws);
  const LabeledScoreSet set = load_labeled_scores(labels);

  const Result dcf = run({"threshold", "--labels", labels, "--dcf", "0.5,1,10"});
  REQUIRE(dcf.code == 0);
  const auto j = nlohmann::json::parse(dcf.out);
  CHECK(j["tau"].get<double>() == min_dcf_threshold(set, kMinDcf3).threshold.tau);
  CHECK(j["metric"] == "min_dcf");
  CHECK(j["provenance"]["c_fa"].get<double>() == 10.0);
  CHECK(run({"threshold", "--labels", labels, "--mindcf", "3"}).out == dcf.out);

  const Result eer = run({"threshold", "--labels", labels, "--eer"});
  REQUIRE(eer.code == 0);
  const auto je = nlohmann::json::parse(eer.out);
  CHECK(je["tau"].get<double>() == eer_threshold(set).threshold.tau);
  CHECK(je["metric_value"].get<double>() == eer_threshold(set).eer);

  CHECK(run({"threshold", "--labels", labels}).code == 1);
  CHECK(run({"threshold", "--labels", labels, "--eer", "--mindcf", "1"}).code == 1);
  CHECK(run({"threshold", "--labels", labels, "--mindcf", "4"}).code == 1);
  const Result missing = run({"threshold", "--labels", ws.path("nope.csv"), "--eer"});
  CHECK(missing.code == 1);
  CHECK_FALSE(missing.err.empty());
  CHECK(run({"threshold", "--labels", ws.write("bad.csv", "label,score\nmaybe,1\n"), "--eer"})
            .code == 1);
}

TEST_CASE("help, unknown flags and bad input") {
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"fit", "--help"}).code == 0);
  CHECK(run({}).code == 1);
  CHECK(run({"fit", "--no-such-flag"}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);

  Workspace ws;
  const auto bad = ws.write("bad.csv", "target_id,impostor_id,score\na,b,1\na,b,oops\n");
  const Result r = run({"fit", "--corpus", bad});
  CHECK(r.code == 1);
  CHECK(r.err.find("3") != std::string::npos);  // offending line
  CHECK(run({"fit", "--corpus", ws.path("missing.csv")}).code == 1);
  CHECK(run({"predict", "--theta", ws.write("t.json", "{not json"), "--tau", "0"}).code == 1);
  CHECK(run({"predict", "--theta", ws.write("t2.json", kTheta)}).code == 1);  // no threshold
  CHECK(run({"predict", "--theta", ws.path("t2.json"), "--tau", "0", "--override",
             "gamma=1"})
            .code == 1);
}

TEST_CASE("binary exit codes") {
  const std::string bin = WCFA_CLI_PATH;
  CHECK(exit_status(bin + " --help > /dev/null") == 0);
  CHECK(exit_status(bin + " threshold --bogus 2> /dev/null") == 1);
  CHECK(exit_status(bin + " stats --corpus /nonexistent/x.csv 2> /dev/null") == 1);
}

TEST_CASE("simulate output round-trips without loss") {
  Workspace ws;
  const auto spec = ws.write("m.json", model_spec_json(4, 5, 6, 9));
  const Result r = run({"simulate", "--spec", spec});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  const TrialCorpus loaded = parse_corpus(in, CorpusFormat::csv);
  const TrialCorpus direct = generate_model_corpus(
      synthetic_spec_from_json(nlohmann::json::parse(model_spec_json(4, 5, 6, 9))));
  CHECK(loaded == direct);

  const Result reseeded = run({"simulate", "--spec", spec, "--seed", "10"});
  CHECK(reseeded.out != r.out);
  CHECK(run({"simulate", "--spec", ws.write("x.json", R"({"mode": "other"})")}).code == 1);
}

TEST_CASE("fit with overrides and trace") {
  Workspace ws;
  const auto corpus = ws.path("m.csv");
  REQUIRE(run({"simulate", "--spec", ws.write("m.json", model_spec_json(30, 8, 10, 2)), "--out",
               corpus})
              .code == 0);
  const Result plain = run({"fit", "--corpus", corpus});
  REQUIRE(plain.code == 0);
  const Result edited = run({"fit", "--corpus", corpus, "--override", "alpha_lambda=2.0",
                             "--trace", ws.path("trace.csv")});
  REQUIRE(edited.code == 0);
  auto a = nlohmann::json::parse(plain.out), b = nlohmann::json::parse(edited.out);
  CHECK(b["alpha_lambda"].get<double>() == 2.0);
  CHECK(a["alpha_lambda"].get<double>() != 2.0);
  b["alpha_lambda"] = a["alpha_lambda"];
  CHECK(a == b);

  std::istringstream trace(slurp(ws.path("trace.csv")));
  std::string line;
  std::getline(trace, line);
  CHECK(line == "iteration,elbo");
  double prev = -INFINITY;
  std::size_t rows = 0;
  while (std::getline(trace, line)) {
    const double v = std::stod(line.substr(line.find(',') + 1));
    CHECK(v >= prev - 1e-8 * std::abs(v));
    prev = v;
    ++rows;
  }
  CHECK(rows >= 2);
  const auto theta = ws.write("theta.json", plain.out);
  CHECK(hyperparameters_from_json(nlohmann::json::parse(slurp(theta))).alpha_lambda ==
        a["alpha_lambda"].get<double>());
}

TEST_CASE("empirical and predict tables") {
  Workspace ws;
  const auto [corpus, labels] = toy_files(ws);
  const Result e = run({"empirical", "--corpus", corpus, "--labels", labels, "--threshold",
                        "eer", "--n", "1,4,16", "--t", "2000"});
  REQUIRE(e.code == 0);
  std::istringstream rows(e.out);
  std::string line;
  std::getline(rows, line);
  CHECK(line == "N,estimate,ci_low,ci_high");
  std::vector<double> estimates;
  while (std::getline(rows, line)) {
    std::istringstream cells(line);
    std::string n, v, lo, hi;
    std::getline(cells, n, ',');
    std::getline(cells, v, ',');
    std::getline(cells, lo, ',');
    std::getline(cells, hi, ',');
    CHECK(std::stod(lo) <= std::stod(v));
    CHECK(std::stod(v) <= std::stod(hi));
    estimates.push_back(std::stod(v));
  }
  REQUIRE(estimates.size() == 3);
  CHECK(estimates[0] < estimates[2]);
  CHECK(run({"empirical", "--corpus", corpus, "--tau", "0", "--n", "1000"}).code == 1);
  CHECK(run({"empirical", "--corpus", corpus, "--tau", "-0.5", "--zero-effort"}).code == 0);

  const auto theta = ws.write("theta.json", kTheta);
  for (const char* method : {"sampling", "closed_form"}) {
    const Result p = run({"predict", "--theta", theta, "--tau", "1", "--n", "1,10", "--L", "20",
                          "--method", method, "--t", "500"});
    REQUIRE(p.code == 0);
    CHECK(p.out.rfind("N,estimate,ci_low,ci_high\n1,", 0) == 0);
  }
}

TEST_CASE("curve") {
  Workspace ws;
  const auto corpus = ws.path("m.csv");
  REQUIRE(run({"simulate", "--spec", ws.write("m.json", model_spec_json(20, 12, 10, 5)),
               "--out", corpus})
              .code == 0);
  const auto theta = ws.write("theta.json", kTheta);
  const std::vector<std::string> args{"curve",    "--corpus", corpus,         "--theta",
                                      theta,      "--n",      "1,12,100000", "--tau-spec",
                                      "low=0.5",  "--tau-spec", "high=2",     "--t",
                                      "50",       "--method", "closed_form"};
  const Result r = run(args);
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "N,tau_label,tau,source,estimate,ci_low,ci_high");
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 12);  // 3 sizes x 2 thresholds x 2 sources
  CHECK(lines[0].rfind("1,low,0.5,empirical,", 0) == 0);
  CHECK(lines[1].rfind("1,low,0.5,model,", 0) == 0);
  CHECK(lines[4].rfind("12,low,0.5,empirical,", 0) == 0);
  CHECK(lines[4].find(",,") == std::string::npos);
  CHECK(lines[8] == "100000,low,0.5,empirical,,,");
  CHECK(lines[9].rfind("100000,low,0.5,model,", 0) == 0);
  CHECK(lines[9].find(",,") == std::string::npos);
  CHECK(run(args).out == r.out);

  CHECK(run({"curve", "--theta", theta, "--n", "10,1", "--tau", "0"}).code == 1);
  CHECK(run({"curve", "--n", "1", "--tau", "0"}).code == 1);
  const Result model_only = run({"curve", "--theta", theta, "--n", "1,2", "--tau", "0", "--t",
                                 "100"});
  REQUIRE(model_only.code == 0);
  CHECK(model_only.out.find("empirical") == std::string::npos);
}

TEST_CASE("diagnose and stats") {
  Workspace ws;
  const auto corpus = ws.path("m.csv");
  REQUIRE(run({"simulate", "--spec", ws.write("m.json", model_spec_json(10, 6, 5, 6)), "--out",
               corpus})
              .code == 0);
  const Result d = run({"diagnose", "--corpus", corpus, "--tau", "1", "--n", "3", "--t", "300"});
  REQUIRE(d.code == 0);
  const auto j = nlohmann::json::parse(d.out);
  CHECK(j.contains("closest_impostor_stdev"));
  CHECK(j["n_impostors"] == 3);

  const Result s = run({"stats", "--corpus", corpus, "--pairs"});
  REQUIRE(s.code == 0);
  const auto js = nlohmann::json::parse(s.out);
  CHECK(js["targets"] == 10);
  CHECK(js["scores"] == 300);
}

TEST_CASE("seeds") {
  Workspace ws;
  const auto theta = ws.write("theta.json", kTheta);
  const std::vector<std::string> args{"predict", "--theta", theta, "--tau", "1", "--n", "5",
                                      "--t", "300"};
  auto with_seed = [&](const std::string& seed) {
    auto a = args;
    a.insert(a.end(), {"--seed", seed});
    return run(a).out;
  };
  CHECK(with_seed("7") == with_seed("7"));
  CHECK(with_seed("7") != with_seed("8"));

  ::setenv(cli::kSeedEnv, "7", 1);
  CHECK(run(args).out == with_seed("7"));
  ::setenv(cli::kSeedEnv, "garbage", 1);
  CHECK(run(args).code == 1);
  ::unsetenv(cli::kSeedEnv);
  CHECK(run(args).out == with_seed("1"));

  auto threaded = args;
  threaded.insert(threaded.end(), {"--threads", "3"});
  CHECK(run(threaded).out == with_seed("1"));
}
