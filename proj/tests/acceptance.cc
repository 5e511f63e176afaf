// Copyright 2026 The segdpo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails. Usage: segdpo_acceptance [--only 1,5,9] [--workdir DIR]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.h"
#include "json.hpp"
#include "segdpo/eval.h"
#include "segdpo/losses.h"
#include "segdpo/pipeline.h"
#include "segdpo/serialization.h"
#include "segdpo/tabular_mdp.h"
#include "segdpo/trainer.h"
#include "test_util.h"

namespace segdpo {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using testing::RandomPair;
using testing::RandomPolicy;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Num(double v, int digits = 3) {
  char buf[64];
  if (v != 0.0 && (std::abs(v) < 1e-3 || std::abs(v) >= 1e5)) {
    std::snprintf(buf, sizeof buf, "%.2e", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  }
  return buf;
}

fs::path g_workdir;

// Runs a CLI command with its progress output suppressed.
int Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "segdpo");
  std::ostringstream sink;
  std::streambuf* old = std::cerr.rdbuf(sink.rdbuf());
  const int code = cli::Run(args);
  std::cerr.rdbuf(old);
  if (code != 0) std::cerr << "command failed (" << code << "):\n" << sink.str();
  return code;
}

nlohmann::json Defaults() { return nlohmann::json::parse(cli::DefaultConfigJson()); }

SessionPair AsSessionPair(const PreferencePair& p) {
  return SessionPair(p.positive().session_ptr(), p.negative().session_ptr(), p.perspective(),
                     p.provenance());
}

// 1
Outcome ReductionIdentities() {
  Rng rng(101);
  double worst_dpo = 0.0, worst_eto = 0.0;
  for (uint64_t i = 0; i < 200; ++i) {
    Policy p = RandomPolicy(rng);
    ReferencePolicy ref(RandomPolicy(rng));
    const LossConfig cfg{0.1, 0.99};
    const PreferencePair one = testing::WithLength(RandomPair(DeriveSeed(101, {i})), 1);
    worst_dpo = std::max(worst_dpo, std::abs(SdpoLoss(one, p, ref, cfg).value -
                                             DpoLoss(one, p, ref, cfg).value));
    const PreferencePair full = testing::FullSpanPair(DeriveSeed(102, {i}));
    worst_eto = std::max(worst_eto, std::abs(SdpoLoss(full, p, ref, cfg).value -
                                             EtoLoss(AsSessionPair(full), p, ref, cfg).value));
  }
  return {worst_dpo <= 1e-12 && worst_eto <= 1e-12,
          "max|sdpo(L=1)-dpo| " + Num(worst_dpo) + ", max|sdpo(full)-eto| " + Num(worst_eto)};
}

// 2
Outcome BaselineValue() {
  Rng rng(201);
  double worst = 0.0;
  const double ln2 = std::log(2.0);
  for (uint64_t i = 0; i < 200; ++i) {
    Policy p = RandomPolicy(rng);
    ReferencePolicy ref(p);
    const LossConfig cfg{0.1, 0.95};
    const PreferencePair pair = RandomPair(DeriveSeed(201, {i}));
    const SessionPair sp = AsSessionPair(pair);
    for (double v : {DpoLoss(testing::WithLength(pair, 1), p, ref, cfg).value,
                     SdpoLoss(pair, p, ref, cfg).value, EtoLoss(sp, p, ref, cfg).value,
                     DmpoLoss(sp, p, ref, cfg).value}) {
      worst = std::max(worst, std::abs(v - ln2));
    }
  }
  return {worst <= 1e-12, "max|loss - ln 2| " + Num(worst) + " over 200 pairs x 4 losses"};
}

// 3
Outcome GradientCorrectness() {
  const double step = 1e-5;
  std::string detail;
  bool pass = true;
  for (const std::string method : {"dpo", "eto", "dmpo", "sdpo"}) {
    Rng rng(301);
    double worst = 0.0;
    for (uint64_t i = 0; i < 100; ++i) {
      Policy p = RandomPolicy(rng);
      ReferencePolicy ref(RandomPolicy(rng));
      const LossConfig cfg{0.1 + rng.Uniform01(), 0.9};
      const PreferencePair pair = RandomPair(DeriveSeed(301, {i}));
      const PreferencePair one = testing::WithLength(pair, 1);
      const SessionPair sp = AsSessionPair(pair);
      auto loss = [&](const Policy& q) {
        if (method == "dpo") return DpoLoss(one, q, ref, cfg);
        if (method == "eto") return EtoLoss(sp, q, ref, cfg);
        if (method == "dmpo") return DmpoLoss(sp, q, ref, cfg);
        return SdpoLoss(pair, q, ref, cfg);
      };
      const std::vector<double> g = loss(p).grad;
      double diff = 0.0, norm = 0.0;
      for (int k = 0; k < Policy::dim(); ++k) {
        Policy hi = p, lo = p;
        hi.mutable_theta()[k] += step;
        lo.mutable_theta()[k] -= step;
        const double fd = (loss(hi).value - loss(lo).value) / (2 * step);
        diff = std::max(diff, std::abs(fd - g[k]));
        norm = std::max(norm, std::abs(g[k]));
      }
      // a pair whose segments coincide has an exactly zero gradient
      worst = std::max(worst, norm > 0.0 ? diff / norm : diff);
    }
    pass &= worst < 1e-6;
    detail += (detail.empty() ? "" : ", ") + method + " " + Num(worst);
  }
  return {pass, "max relative error: " + detail};
}

// 4
Outcome DiscountFunction() {
  bool exact = true;
  double worst = 0.0;
  for (int T = 1; T <= 10; ++T) {
    for (double gamma : {0.0, 0.5, 0.9, 0.99, 1.0 - 1e-9, 1.0}) {
      if (gamma > 0.0) exact &= DiscountWeight(0, T, gamma) == 1.0;
    }
    for (int t = 0; t < T; ++t) {
      worst = std::max(worst, std::abs(DiscountWeight(t, T, 1.0 - 1e-9) -
                                       static_cast<double>(T - t) / T));
    }
  }
  return {exact && worst <= 1e-6, std::string("phi(0,T) == 1: ") + (exact ? "yes" : "no") +
                                      ", max|phi - (T-t)/T| at 1-1e-9: " + Num(worst)};
}

// 5
Outcome OccupancyOracle() {
  Rng rng(501);
  const int S = 3, A = 2, H = 4;
  const double gamma = 0.9;
  const TabularMdp m = testing::RandomMdp(rng, S, A, H);
  const PolicyTable pi = testing::RandomPolicyTable(rng, S, A);
  const Occupancy d = OccupancyByEnumeration(m, pi, gamma);
  const int n = 1000000;
  std::vector<double> counts(S * A * H, 0.0);
  Rng sim(502);
  std::vector<double> next(S);
  for (int k = 0; k < n; ++k) {
    int s = sim.Categorical(m.initial);
    for (int t = 0; t < H; ++t) {
      const int a = sim.Categorical(std::span<const double>(pi.data() + s * A, A));
      counts[(t * S + s) * A + a] += 1.0;
      for (int s2 = 0; s2 < S; ++s2) next[s2] = m.P(s, a, s2);
      s = sim.Categorical(next);
    }
  }
  double worst_z = 0.0, worst_mass = 0.0;
  for (int t = 0; t < H; ++t) {
    worst_mass = std::max(worst_mass, std::abs(d.MassAt(t) - std::pow(gamma, t)));
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const double p = counts[(t * S + s) * A + a] / n;
        const double se = std::pow(gamma, t) * std::sqrt(p * (1 - p) / n);
        worst_z = std::max(worst_z, std::abs(std::pow(gamma, t) * p - d.at(s, a, t)) / se);
      }
    }
  }
  return {worst_z <= 3.0 && worst_mass <= 1e-12,
          "max |MC - exact| / SE " + Num(worst_z, 2) + " over 24 cells, max|mass - gamma^t| " +
              Num(worst_mass)};
}

// 6
Outcome RewardIdentity() {
  Rng rng(601);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int S = 2 + static_cast<int>(rng.UniformInt(4));
    const int A = 2 + static_cast<int>(rng.UniformInt(2));
    const TabularMdp m = testing::RandomMdp(rng, S, A, 2 + static_cast<int>(rng.UniformInt(4)));
    const PolicyTable ref = testing::RandomPolicyTable(rng, S, A);
    std::vector<double> r(S * A);
    for (double& x : r) x = rng.Uniform01() * 4 - 2;
    const double beta = 0.05 + rng.Uniform01();
    const double gamma = 0.5 + 0.5 * rng.Uniform01();
    worst = std::max(worst, RewardIdentityCheck(m, ref, r, beta, gamma));
  }
  return {worst < 1e-8, "max residual up to a constant " + Num(worst) + " over 50 MDPs"};
}

// 7
Outcome ZCancellation() {
  Rng rng(701);
  double sdpo_worst = 0.0, eto_least = 1e300;
  for (uint64_t i = 0; i < 200; ++i) {
    Policy p = RandomPolicy(rng);
    ReferencePolicy ref(RandomPolicy(rng));
    const LossConfig cfg{0.1, 0.99};
    const LossValue seg = SdpoLoss(RandomPair(DeriveSeed(701, {i})), p, ref, cfg);
    auto [pos, neg] = testing::SessionsWithRounds(DeriveSeed(702, {i}), 0, 0, Role::kFirst);
    SessionPair sp(pos, neg, Role::kFirst, Provenance::kSelfChat);
    if (sp.positive().length() == sp.negative().length()) continue;
    const LossValue ses = EtoLoss(sp, p, ref, cfg);
    const double c = 0.1;
    auto shift = [c](std::vector<double> v) {
      for (double& x : v) x += c;
      return v;
    };
    sdpo_worst = std::max(
        sdpo_worst,
        std::abs(SdpoLossFromLogRatios(shift(seg.logratio_pos), shift(seg.logratio_neg), cfg.beta) -
                 seg.value));
    eto_least = std::min(
        eto_least,
        std::abs(EtoLossFromLogRatios(shift(ses.logratio_pos), shift(ses.logratio_neg), cfg.beta) -
                 ses.value));
  }
  return {sdpo_worst <= 1e-12 && eto_least >= 1e-3,
          "c = 0.1: max sdpo change " + Num(sdpo_worst) + ", min eto change (unequal lengths) " +
              Num(eto_least)};
}

// 8
Outcome PipelineGates() {
  const nlohmann::json d = Defaults();
  PipelineConfig cfg = PipelineConfigFromJson(d["pipeline"]);
  cfg.seed = 801;
  auto policy = std::make_shared<const Policy>();
  std::vector<Session> negatives;
  for (uint64_t batch = 0; negatives.size() < 200; ++batch) {
    for (Session& s : CollectNegatives(policy, GenerateScenarios(50, DeriveSeed(801, {batch})), cfg)) {
      if (negatives.size() < 200) negatives.push_back(std::move(s));
    }
  }
  ProgrammaticJudge judge(policy, cfg);
  const PairBuildResult r = BuildPairs(negatives, policy, judge, cfg);
  // check the pairs as read back from disk
  const fs::path file = g_workdir / "c8_pairs.jsonl";
  WritePairs(file, r.pairs);
  const std::vector<PreferencePair> pairs = ReadPreferencePairs(file);
  int bad_gate = 0, bad_prefix = 0, bad_length = 0;
  for (const PreferencePair& p : pairs) {
    bad_gate += !PassesGate(p.scores_pos(), p.scores_neg());
    const size_t prefix = HistoryLength(p.start(), p.perspective());
    const auto& tw = p.positive().session().turns;
    const auto& tl = p.negative().session().turns;
    bad_prefix += tw.size() < prefix || tl.size() < prefix ||
                  !std::equal(tw.begin(), tw.begin() + prefix, tl.begin()) ||
                  !(p.positive().steps()[0].history == p.negative().steps()[0].history);
    bad_length += p.positive().length() != p.negative().length();
  }
  const PipelineStats& s = r.stats;
  int hist = 0;
  for (const auto& [k, v] : s.e_histogram) hist += v;
  const bool accounting = s.negatives == 200 &&
                          s.paired + s.discarded + s.no_error + s.judge_failures == 200 &&
                          static_cast<int>(pairs.size()) == s.paired && hist == s.paired;
  return {bad_gate == 0 && bad_prefix == 0 && bad_length == 0 && accounting && s.paired > 0,
          std::to_string(s.paired) + " paired, " + std::to_string(s.discarded) + " discarded, " +
              std::to_string(s.no_error) + " no error, " + std::to_string(s.judge_failures) +
              " judge failures; violations: gate " + std::to_string(bad_gate) + ", prefix " +
              std::to_string(bad_prefix) + ", length " + std::to_string(bad_length) +
              "; accounting " + (accounting ? "exact" : "off")};
}

// 9
Outcome GapDirection() {
  const nlohmann::json d = Defaults();
  double dpo_first = 0.0, dpo_later = 0.0, dpo_seg = 0.0, sdpo_seg = 0.0;
  const int seeds = 5;
  for (uint64_t seed = 1; seed <= seeds; ++seed) {
    const std::vector<Scenario> sc = GenerateScenarios(200, DeriveSeed(seed, {0x5ce7}));
    std::vector<Session> expert;
    for (size_t i = 0; i < sc.size(); ++i) {
      Rng rng(DeriveSeed(seed, {i, 0}));
      expert.push_back(Rollout(sc[i], Role::kFirst, Actor::Expert(), Actor::Expert(), rng));
    }
    TrainConfig bc = TrainConfigFromJson(d["bc"]);
    bc.method = Method::kBc;
    bc.seed = seed;
    TrainData bd;
    bd.sessions = expert;
    auto init = std::make_shared<const Policy>(Train(bc, bd, Policy(), nullptr).state.policy);
    PipelineConfig pc = PipelineConfigFromJson(d["pipeline"]);
    pc.seed = seed;
    ProgrammaticJudge judge(init, pc);
    const PairBuildResult pr = BuildPairs(CollectNegatives(init, sc, pc), init, judge, pc);
    std::vector<PreferencePair> multi;
    for (const auto& p : pr.pairs) {
      if (p.length() >= 2) multi.push_back(p);
    }
    const ReferencePolicy ref(*init);
    const SegmentGaps before = MeasureGaps(*init, multi);
    for (Method m : {Method::kDpo, Method::kSdpo}) {
      TrainConfig tc = TrainConfigFromJson(d["train"]);
      tc.method = m;
      tc.seed = seed;
      TrainData td;
      for (const auto& p : pr.pairs) {
        td.segment_pairs.push_back(m == Method::kDpo ? ReshapePair(p, 1, 1) : p);
      }
      const SegmentGaps after = MeasureGaps(Train(tc, td, *init, &ref).state.policy, multi);
      const double seg = after.segment - before.segment;
      const double first = after.first_turn - before.first_turn;
      if (m == Method::kDpo) {
        dpo_first += first / seeds;
        dpo_later += (seg - first) / seeds;
        dpo_seg += seg / seeds;
      } else {
        sdpo_seg += seg / seeds;
      }
    }
  }
  const bool confined = dpo_first > 0.0 && std::abs(dpo_later) < 0.1 * dpo_first;
  const bool steeper = sdpo_seg >= 2.0 * dpo_seg;
  return {confined && steeper,
          "dpo: first-turn gap change " + Num(dpo_first) + ", later-turn change " +
              Num(dpo_later) + " (" + (confined ? "within" : "not within") +
              " 10%); segment gap change sdpo " + Num(sdpo_seg) + " vs dpo " + Num(dpo_seg) +
              " (ratio " + Num(sdpo_seg / dpo_seg, 2) + ", needs >= 2)"};
}

// 10
Outcome EndToEnd() {
  const std::vector<std::string> methods = {"bc", "dpo", "eto", "dmpo", "sdpo"};
  std::vector<EvalReport> reports;
  for (int seed = 1; seed <= 5; ++seed) {
    const fs::path out = g_workdir / ("c10_seed" + std::to_string(seed));
    fs::remove_all(out);
    if (Cli({"repro", "--seed", std::to_string(seed), "--set",
             R"(repro.methods=["dpo","eto","dmpo","sdpo"])", "--set", "eval.n_scenarios=400",
             "--out", out.string()}) != 0) {
      return {false, "repro failed for seed " + std::to_string(seed)};
    }
    for (const auto& m : methods) {
      std::ifstream in(out / ("eval_" + m) / "report.json");
      reports.push_back(EvalReport::FromJson(nlohmann::json::parse(in)));
    }
  }
  const Comparison c = CompareMethods(reports, 1000, 0);
  auto goal = [&](const std::string& m) { return c.Method(m).goal.mean; };
  const Interval diff = c.Pair("sdpo", "dpo").goal_difference;
  const bool order = goal("sdpo") >= goal("eto") && goal("sdpo") >= goal("dmpo") &&
                     goal("sdpo") > goal("dpo") && goal("dpo") > goal("bc");
  const bool significant = diff.lo > 0.0;
  std::string detail = "goal";
  for (const auto& m : methods) detail += " " + m + " " + Num(goal(m));
  detail += "; relationship";
  for (const auto& m : methods) detail += " " + m + " " + Num(c.Method(m).relationship.mean);
  detail += "; sdpo-dpo " + Num(diff.mean) + " [" + Num(diff.lo) + ", " + Num(diff.hi) + "]";
  detail += order ? "; ordering holds" : "; ordering violated";
  return {order && significant, detail};
}

// 11
Outcome SegmentAblation() {
  const fs::path out = g_workdir / "c11";
  fs::remove_all(out);
  auto p = [&](const std::string& rel) { return (out / rel).string(); };
  if (Cli({"gen-scenarios", "--n", "200", "--seed", "11", "--out", p("sc")}) ||
      Cli({"gen-expert", "--scenarios", p("sc/scenarios.jsonl"), "--seed", "11", "--out", p("ex")}) ||
      Cli({"train", "--method", "bc", "--sessions", p("ex/expert.jsonl"), "--out", p("bc")}) ||
      Cli({"collect-pairs", "--policy", p("bc/checkpoint.json"), "--scenarios", p("sc/scenarios.jsonl"),
           "--out", p("pairs")})) {
    return {false, "pipeline setup failed"};
  }
  if (Cli({"ablate-segment", "--policy", p("bc/checkpoint.json"), "--pairs", p("pairs/pairs.jsonl"),
           "--lengths", "[1,1] [3,3] [5,5] [auto,auto] [1,3] [3,5] [3,1] [5,3]", "--out", p("grid")})) {
    return {false, "ablate-segment did not complete"};
  }
  if (Cli({"reshape-pairs", "--pairs", p("pairs/pairs.jsonl"), "--out", p("pairs1")}) ||
      Cli({"train", "--method", "dpo", "--pairs", p("pairs1/pairs.jsonl"), "--init",
           p("bc/checkpoint.json"), "--monitor", p("pairs/pairs.jsonl"), "--out", p("dpo")})) {
    return {false, "plain dpo run failed"};
  }
  const auto cell = ReadTraceCsv(p("grid/len_1_1/trace.csv"));
  const auto dpo = ReadTraceCsv(p("dpo/trace.csv"));
  double worst = cell.size() == dpo.size() ? 0.0 : 1e300;
  for (size_t i = 0; i < std::min(cell.size(), dpo.size()); ++i) {
    for (double delta : {cell[i].loss - dpo[i].loss, cell[i].grad_norm - dpo[i].grad_norm,
                         cell[i].gap_segment - dpo[i].gap_segment,
                         cell[i].gap_first_turn - dpo[i].gap_first_turn}) {
      worst = std::max(worst, std::abs(delta));
    }
  }
  std::ifstream csv(p("grid/ablation.csv"));
  std::string line, rows;
  int n = 0, unknown = 0;
  std::getline(csv, line);
  while (std::getline(csv, line)) {
    const std::string cellname = line.substr(1, line.find('"', 1) - 1);
    const std::string status = line.substr(line.rfind(',') + 1);
    unknown += status != "ok" && status != "collapsed";
    rows += (n++ ? ", " : "") + cellname + " " + status;
  }
  return {worst <= 1e-12 && n == 8 && unknown == 0,
          "[1,1] vs dpo max trace difference " + Num(worst) + " over " +
              std::to_string(cell.size()) + " steps; rows: " + rows};
}

// 12
Outcome Determinism() {
  const fs::path a = g_workdir / "c12_a", b = g_workdir / "c12_b";
  for (const fs::path& out : {a, b}) {
    fs::remove_all(out);
    if (Cli({"repro", "--seed", "12", "--set", "repro.n_scenarios=150", "--set",
             "eval.n_scenarios=100", "--out", out.string()}) != 0) {
      return {false, "repro failed"};
    }
  }
  auto listing = [](const fs::path& root) {
    std::set<std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (e.is_regular_file() && e.path().filename() != "run.log") {
        files.insert(fs::relative(e.path(), root).generic_string());
      }
    }
    return files;
  };
  auto bytes = [](const fs::path& f) {
    std::ifstream in(f, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  const auto fa = listing(a), fb = listing(b);
  if (fa != fb) return {false, "the two runs wrote different file sets"};
  int differing = 0;
  std::string first;
  for (const auto& f : fa) {
    if (bytes(a / f) != bytes(b / f)) {
      if (differing++ == 0) first = f;
    }
  }
  return {differing == 0 && !fa.empty(),
          std::to_string(fa.size()) + " artifacts compared, " + std::to_string(differing) +
              " differ" + (first.empty() ? "" : " (first: " + first + ")")};
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;  // 0: no runtime bound
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace segdpo

int main(int argc, char** argv) {
  using namespace segdpo;
  std::set<int> only;
  fs::path workdir = fs::temp_directory_path() / "segdpo_acceptance";
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      std::stringstream list(argv[++i]);
      for (std::string item; std::getline(list, item, ',');) only.insert(std::stoi(item));
    } else if (arg == "--workdir" && i + 1 < argc) {
      workdir = argv[++i];
    } else {
      std::cerr << "usage: " << argv[0] << " [--only 1,2,...] [--workdir DIR]\n";
      return 2;
    }
  }
  fs::create_directories(workdir);
  g_workdir = workdir;

  const std::vector<Criterion> criteria = {
      {1, "reduction identities", 1.0, ReductionIdentities},
      {2, "baseline loss value", 0.0, BaselineValue},
      {3, "gradient correctness", 10.0, GradientCorrectness},
      {4, "discount function", 0.0, DiscountFunction},
      {5, "occupancy oracle", 0.0, OccupancyOracle},
      {6, "reward identity", 0.0, RewardIdentity},
      {7, "equal-length shift invariance", 0.0, ZCancellation},
      {8, "pipeline gates", 0.0, PipelineGates},
      {9, "gap direction (5 seeds)", 300.0, GapDirection},
      {10, "end-to-end ordering (5 seeds)", 900.0, EndToEnd},
      {11, "segment-length ablation", 0.0, SegmentAblation},
      {12, "repro determinism", 0.0, Determinism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    std::string timing = Num(secs, 1) + " s";
    if (c.budget_seconds > 0.0) {
      timing += " of " + Num(c.budget_seconds, 0) + " s";
      if (secs >= c.budget_seconds) {
        o.pass = false;
        timing += ", over budget";
      }
    }
    failed += !o.pass;
    std::printf("%s  %2d  %-30s %s (%s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), timing.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
