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

#include <gtest/gtest.h>

#include <sstream>

#include "segdpo/error.h"
#include "segdpo/eval.h"
#include "test_util.h"

namespace segdpo {
namespace {

using testing::RandomPolicy;

std::vector<Scenario> SymmetricScenarios(int n, uint64_t seed) {
  std::vector<Scenario> out;
  for (const Scenario& s : GenerateScenarios(n, seed)) {
    out.push_back(MakeScenario(s.id + "-sym", s.pool, s.valuations[0], s.valuations[0], s.max_rounds));
  }
  return out;
}

EvalConfig Cfg(std::vector<std::string> partners, int n = 50, uint64_t seed = 1) {
  EvalConfig c;
  c.partners = std::move(partners);
  c.n_scenarios = n;
  c.seed = seed;
  return c;
}

TEST(EvalConfig, DefaultsAndValidation) {
  EvalConfig c;
  EXPECT_DOUBLE_EQ(c.temperature, 0.7);
  EXPECT_DOUBLE_EQ(c.hard_quartile, 0.25);
  EXPECT_EQ(ToJson(EvalConfigFromJson(ToJson(c))), ToJson(c));
  for (auto patch : {nlohmann::json{{"n_scenarios", 0}}, nlohmann::json{{"temperature", 0.0}},
                     nlohmann::json{{"partners", nlohmann::json::array()}},
                     nlohmann::json{{"hard_quartile", 1.5}}, nlohmann::json{{"extra", 1}}}) {
    nlohmann::json j = ToJson(c);
    j.merge_patch(patch);
    EXPECT_THROW(EvalConfigFromJson(j).Validate(), Error) << patch.dump();
  }
}

TEST(Evaluate, SeatSymmetryInSelfPlay) {
  Rng rng(2);
  auto policy = std::make_shared<const Policy>(RandomPolicy(rng, 0.3));
  std::vector<Scenario> sc = SymmetricScenarios(300, 3);
  EvalReport r = Evaluate(Actor::FromPolicy(policy, {0.7, false}), policy, sc, Cfg({"self"}), "p");
  double first = 0.0, second = 0.0;
  int nf = 0, ns = 0;
  for (const auto& o : r.sessions) {
    (o.role == Role::kFirst ? first : second) += o.goal;
    (o.role == Role::kFirst ? nf : ns) += 1;
  }
  ASSERT_EQ(nf + ns, 600);
  EXPECT_LT(std::abs(first / nf - second / ns), 0.3);
}

TEST(Evaluate, ExpertAgainstCooperativePartner) {
  EvalConfig c = Cfg({"cooperative"}, 200);
  EvalReport r = Evaluate(Actor::Expert(), nullptr, EvalScenarios(c), c, "expert");
  EXPECT_GE(r.goal, 8.0);
  EXPECT_LE(r.goal, 10.0);
}

TEST(Evaluate, TruncationCapsAgentRounds) {
  EvalConfig c = Cfg({"stubborn", "self"}, 40);
  c.truncate_agent_rounds = 8;
  auto policy = std::make_shared<const Policy>();
  EvalReport r = EvaluatePolicy(policy, c, "uniform");
  bool hit_cap = false;
  for (const auto& o : r.sessions) {
    EXPECT_LE(o.agent_rounds, 8);
    hit_cap |= o.agent_rounds == 8;
  }
  EXPECT_TRUE(hit_cap);
}

TEST(Evaluate, ReportLayoutAndBounds) {
  Rng rng(4);
  auto policy = std::make_shared<const Policy>(RandomPolicy(rng));
  EvalConfig c = Cfg({"self", "cooperative", "stubborn", "tempered:0.7"}, 30);
  EvalReport r = EvaluatePolicy(policy, c, "rand");
  ASSERT_EQ(r.sessions.size(), 30u * 2 * 4);
  ASSERT_EQ(r.partners.size(), 4u);
  EXPECT_EQ(r.scenario_ids.size(), 30u);
  double cells = 0.0;
  for (const auto& p : r.partners) {
    EXPECT_EQ(p.sessions, 60);
    for (double g : {p.goal, p.hard_goal}) {
      EXPECT_GE(g, 0.0);
      EXPECT_LE(g, 10.0);
    }
    for (double v : {p.relationship, p.hard_relationship}) {
      EXPECT_GE(v, -5.0);
      EXPECT_LE(v, 5.0);
    }
    cells += p.goal + p.relationship;
  }
  EXPECT_NEAR(r.avg, cells / 8.0, 1e-12);
  int hard = 0;
  for (size_t k = 0; k < r.sessions.size(); ++k) {
    const auto& o = r.sessions[k];
    EXPECT_EQ(o.scenario_index, static_cast<int>(k / 8));
    EXPECT_EQ(o.role, (k / 4) % 2 == 0 ? Role::kFirst : Role::kSecond);
    EXPECT_EQ(o.partner, c.partners[k % 4]);
    hard += o.hard;
  }
  EXPECT_EQ(hard, static_cast<int>(std::ceil(0.25 * 30)) * 8);
  // json round trip
  EvalReport back = EvalReport::FromJson(r.ToJson());
  EXPECT_EQ(back.ToJson(), r.ToJson());
  EXPECT_FALSE(r.ToCsv().empty());
}

TEST(Evaluate, Deterministic) {
  Rng rng(5);
  auto policy = std::make_shared<const Policy>(RandomPolicy(rng));
  EvalConfig c = Cfg({"self", "tempered:0.7"}, 25, 9);
  EvalConfig par = c;
  par.jobs = 4;
  EXPECT_EQ(EvaluatePolicy(policy, c, "x").ToJson(), EvaluatePolicy(policy, c, "x").ToJson());
  EXPECT_EQ(EvaluatePolicy(policy, c, "x").ToJson(), EvaluatePolicy(policy, par, "x").ToJson());
  EvalConfig other = c;
  other.seed = 10;
  EXPECT_NE(EvalScenarios(c)[0].id, EvalScenarios(other)[0].id);
}

TEST(Bootstrap, ConstantsAndMeans) {
  std::vector<double> same(50, 3.0);
  Interval i = BootstrapMean(same, 200, 1);
  EXPECT_DOUBLE_EQ(i.mean, 3.0);
  EXPECT_DOUBLE_EQ(i.lo, 3.0);
  EXPECT_DOUBLE_EQ(i.hi, 3.0);
  std::vector<double> v = {1, 2, 3, 4, 10};
  Interval j = BootstrapMean(v, 1000, 2);
  EXPECT_DOUBLE_EQ(j.mean, 4.0);
  EXPECT_LE(j.lo, j.mean);
  EXPECT_GE(j.hi, j.mean);
  EXPECT_GE(j.lo, 1.0);
  EXPECT_LE(j.hi, 10.0);
  Interval k = BootstrapMean(v, 1000, 2);
  EXPECT_EQ(j.lo, k.lo);
  EXPECT_EQ(j.hi, k.hi);
}

class CompareTest : public ::testing::Test {
 protected:
  EvalReport Report(const std::string& label, int n = 60, uint64_t seed = 1) {
    Rng rng(6);
    auto policy = std::make_shared<const Policy>(RandomPolicy(rng));
    return EvaluatePolicy(policy, Cfg({"self", "cooperative"}, n, seed), label);
  }
};

TEST_F(CompareTest, IdenticalReports) {
  EvalReport a = Report("a");
  EvalReport b = a;
  b.label = "b";
  std::vector<EvalReport> rs = {a, b};
  Comparison c = CompareMethods(rs);
  PairwiseRow p = c.Pair("a", "b");
  EXPECT_DOUBLE_EQ(p.goal_difference.mean, 0.0);
  EXPECT_DOUBLE_EQ(p.goal_difference.lo, 0.0);
  EXPECT_DOUBLE_EQ(p.goal_difference.hi, 0.0);
  EXPECT_DOUBLE_EQ(p.win_rate, 0.5);
  EXPECT_DOUBLE_EQ(c.Method("a").goal.mean, a.goal);
}

TEST_F(CompareTest, Dominance) {
  EvalReport a = Report("a");
  EvalReport b = a;
  b.label = "b";
  for (size_t k = 0; k < a.sessions.size(); ++k) {
    a.sessions[k].goal = 6;
    b.sessions[k].goal = 4;
  }
  std::vector<EvalReport> rs = {b, a};
  Comparison c = CompareMethods(rs);
  PairwiseRow p = c.Pair("a", "b");
  EXPECT_DOUBLE_EQ(p.win_rate, 1.0);
  EXPECT_DOUBLE_EQ(p.goal_difference.mean, 2.0);
  EXPECT_DOUBLE_EQ(c.Pair("b", "a").win_rate, 0.0);
  EXPECT_DOUBLE_EQ(c.Pair("b", "a").goal_difference.mean, -2.0);
  EXPECT_EQ(c.Method("a").rank, 1);
  EXPECT_EQ(c.Method("b").rank, 2);
  EXPECT_THROW(c.Pair("a", "zzz"), Error);
}

TEST_F(CompareTest, IntervalsShrinkWithMoreScenarios) {
  auto width = [&](int n) {
    std::vector<EvalReport> rs = {Report("a", n), Report("b", n)};
    rs[1].label = "b";
    Rng rng(7);
    for (auto& o : rs[1].sessions) o.goal = static_cast<int>(rng.UniformInt(11));
    const Interval i = CompareMethods(rs).Pair("a", "b").goal_difference;
    return i.hi - i.lo;
  };
  EXPECT_LT(width(400), width(100));
}

TEST_F(CompareTest, SeedsMustMatch) {
  std::vector<EvalReport> rs = {Report("a", 20, 1), Report("b", 20, 2)};
  try {
    CompareMethods(rs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kArgument);
  }
  std::vector<EvalReport> one = {Report("a", 20)};
  EXPECT_THROW(CompareMethods(one), Error);
}

TEST_F(CompareTest, SeedsArePooledPerLabel) {
  EvalReport a1 = Report("a");
  EvalReport a2 = a1;
  EvalReport b = a1;
  b.label = "b";
  for (auto& o : a1.sessions) o.goal = 2;
  for (auto& o : a2.sessions) o.goal = 4;
  for (auto& o : b.sessions) o.goal = 3;
  std::vector<EvalReport> rs = {a1, a2, b};
  Comparison c = CompareMethods(rs);
  EXPECT_EQ(c.Method("a").reports, 2);
  EXPECT_DOUBLE_EQ(c.Method("a").goal.mean, 3.0);
  EXPECT_DOUBLE_EQ(c.Pair("a", "b").win_rate, 0.5);
}

TEST(Quality, NonDecreasingInCount) {
  auto policy = std::make_shared<const Policy>();
  std::vector<Session> negatives;
  for (uint64_t s = 0; negatives.size() < 12; ++s) {
    Session neg = testing::RandomSession(s, s % 2 ? Role::kFirst : Role::kSecond, 8);
    if (neg.score(neg.agent_role).goal() < 7) negatives.push_back(neg);
  }
  PipelineConfig cfg;
  cfg.rollouts_per_turn = 4;
  std::vector<QualityRow> rows = PositiveQualityComparison(negatives, policy, cfg, 5);
  ASSERT_EQ(rows.size(), 10u);
  for (const std::string mode : {"segment", "from_scratch"}) {
    double prev = -1.0;
    for (const auto& r : rows) {
      if (r.mode != mode) continue;
      EXPECT_GE(r.goal, prev) << mode << " k=" << r.count;
      prev = r.goal;
      EXPECT_GT(r.negatives, 0);
    }
  }
  EXPECT_TRUE(PositiveQualityComparison({}, policy, cfg, 5).empty());
}

TEST(GapCurves, AlignsOnCommonSteps) {
  auto trace = [](int steps, double slope, int every) {
    std::vector<TraceRecord> t;
    for (int s = 0; s < steps; s += every) {
      TraceRecord r;
      r.step = s;
      r.gap_segment = 0.5 + slope * s;
      r.gap_first_turn = 0.5 + 0.5 * slope * s;
      t.push_back(r);
    }
    return t;
  };
  std::string csv = GapCurvesCsv({"sdpo", "dpo"}, {trace(10, 0.2, 1), trace(21, 0.1, 2)});
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "step,sdpo_gap_segment,sdpo_gap_first_turn,dpo_gap_segment,dpo_gap_first_turn");
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 10u);
  auto field = [](const std::string& row, int k) {
    std::stringstream ss(row);
    std::string f;
    for (int i = 0; i <= k; ++i) std::getline(ss, f, ',');
    return std::stod(f);
  };
  EXPECT_DOUBLE_EQ(field(rows[0], 1), field(rows[0], 3));
  EXPECT_NEAR(field(rows[3], 3), 0.5 + 0.1 * 3, 1e-9);  // interpolated between steps 2 and 4
  EXPECT_GT(field(rows[9], 1), field(rows[9], 3));
}

}  // namespace
}  // namespace segdpo
