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

#include <cmath>
#include <functional>

#include "segdpo/error.h"
#include "segdpo/losses.h"
#include "segdpo/tabular_mdp.h"
#include "test_util.h"

namespace segdpo {
namespace {

using testing::FullSpanPair;
using testing::RandomMdp;
using testing::RandomPair;
using testing::RandomPolicy;
using testing::RandomPolicyTable;
using testing::SessionsWithRounds;
using testing::WithLength;

const double kLn2 = std::log(2.0);

// Per-round log-ratios recomputed from LogProb alone.
std::vector<double> LogRatios(const Segment& seg, const Policy& p, const Policy& ref) {
  std::vector<double> out;
  for (const SegmentStep& st : seg.steps()) {
    out.push_back(LogProb(p, st.history, st.action) - LogProb(ref, st.history, st.action));
  }
  return out;
}

double NaiveNegLogSigmoid(double z) { return std::log1p(std::exp(-z)); }

SessionPair ToSessionPair(const PreferencePair& p) {
  return SessionPair(p.positive().session_ptr(), p.negative().session_ptr(), p.perspective(),
                     p.provenance());
}

SessionPair UnequalSessionPair(uint64_t seed, int tw, int tl) {
  auto [pos, neg] = SessionsWithRounds(seed, tw, tl, seed % 2 ? Role::kFirst : Role::kSecond);
  return SessionPair(pos, neg, pos->agent_role, Provenance::kSelfChat);
}

double GradientRelativeError(const std::function<LossValue(const Policy&)>& loss, const Policy& p) {
  const double step = 1e-5;
  const std::vector<double> g = loss(p).grad;
  double diff = 0.0, norm = 0.0;
  for (int i = 0; i < Policy::dim(); ++i) {
    Policy hi = p, lo = p;
    hi.mutable_theta()[i] += step;
    lo.mutable_theta()[i] -= step;
    const double fd = (loss(hi).value - loss(lo).value) / (2 * step);
    diff = std::max(diff, std::abs(fd - g[i]));
    norm = std::max(norm, std::abs(g[i]));
  }
  // identical positive and negative steps cancel exactly; compare absolutely
  return norm > 0.0 ? diff / norm : diff;
}

TEST(LossConfig, Validation) {
  EXPECT_NO_THROW((LossConfig{0.1, 1.0}.Validate()));
  for (LossConfig bad : {LossConfig{0.0, 0.9}, LossConfig{-1.0, 0.9}, LossConfig{0.1, 0.0},
                         LossConfig{0.1, 1.5}}) {
    try {
      bad.Validate();
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kConfig);
    }
  }
}

TEST(NegLogSigmoid, StableAndExact) {
  EXPECT_DOUBLE_EQ(NegLogSigmoid(0.0), kLn2);
  EXPECT_NEAR(NegLogSigmoid(1.0), 0.31326168751822286, 1e-15);
  EXPECT_NEAR(NegLogSigmoid(-800.0), 800.0, 1e-12);
  EXPECT_GE(NegLogSigmoid(800.0), 0.0);
  EXPECT_NEAR(Sigmoid(2.0) + Sigmoid(-2.0), 1.0, 1e-15);
}

TEST(Losses, EqualLn2AtReference) {
  Rng rng(1);
  const LossConfig cfg;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    Policy p = RandomPolicy(rng);
    ReferencePolicy ref(p);
    PreferencePair pair = RandomPair(seed);
    SessionPair sp = ToSessionPair(pair);
    EXPECT_NEAR(SdpoLoss(pair, p, ref, cfg).value, kLn2, 1e-12);
    EXPECT_NEAR(DpoLoss(WithLength(pair, 1), p, ref, cfg).value, kLn2, 1e-12);
    EXPECT_NEAR(EtoLoss(sp, p, ref, cfg).value, kLn2, 1e-12);
    for (double gamma : {0.5, 0.99, 1.0}) {
      EXPECT_NEAR(DmpoLoss(sp, p, ref, {0.1, gamma}).value, kLn2, 1e-12);
    }
  }
}

TEST(Losses, SdpoWithOneRoundIsDpo) {
  Rng rng(2);
  for (uint64_t seed = 0; seed < 200; ++seed) {
    Policy p = RandomPolicy(rng);
    ReferencePolicy ref(RandomPolicy(rng));
    PreferencePair pair = WithLength(RandomPair(seed), 1);
    LossValue a = SdpoLoss(pair, p, ref, {});
    LossValue b = DpoLoss(pair, p, ref, {});
    ASSERT_NEAR(a.value, b.value, 1e-12);
    for (int i = 0; i < Policy::dim(); ++i) ASSERT_NEAR(a.grad[i], b.grad[i], 1e-12);
  }
}

TEST(Losses, SdpoOverWholeSessionsIsEto) {
  Rng rng(3);
  for (uint64_t seed = 0; seed < 200; ++seed) {
    Policy p = RandomPolicy(rng);
    ReferencePolicy ref(RandomPolicy(rng));
    PreferencePair pair = FullSpanPair(seed);
    LossValue a = SdpoLoss(pair, p, ref, {});
    LossValue b = EtoLoss(ToSessionPair(pair), p, ref, {});
    ASSERT_NEAR(a.value, b.value, 1e-12);
    for (int i = 0; i < Policy::dim(); ++i) ASSERT_NEAR(a.grad[i], b.grad[i], 1e-12);
  }
}

TEST(Losses, EtoWithSingleRoundsIsDpo) {
  Rng rng(4);
  for (uint64_t seed = 0; seed < 50; ++seed) {
    auto [pos, neg] = SessionsWithRounds(seed, 1, 1, Role::kFirst);
    Policy p = RandomPolicy(rng);
    ReferencePolicy ref(RandomPolicy(rng));
    PreferencePair pair(WholeSession(pos, Role::kFirst), WholeSession(neg, Role::kFirst),
                        Provenance::kSelfChat);
    EXPECT_NEAR(EtoLoss(ToSessionPair(pair), p, ref, {}).value, DpoLoss(pair, p, ref, {}).value,
                1e-12);
  }
}

TEST(Losses, ValuesMatchStraightLineRecomputation) {
  Rng rng(5);
  for (uint64_t seed = 0; seed < 100; ++seed) {
    Policy p = RandomPolicy(rng);
    Policy r = RandomPolicy(rng);
    ReferencePolicy ref(r);
    const double beta = 0.05 + rng.Uniform01();
    PreferencePair pair = RandomPair(seed);
    auto w = LogRatios(pair.positive(), p, r);
    auto l = LogRatios(pair.negative(), p, r);
    double z = 0.0;
    for (size_t t = 0; t < w.size(); ++t) z += w[t] - l[t];
    LossValue v = SdpoLoss(pair, p, ref, {beta, 0.99});
    EXPECT_NEAR(v.value, NaiveNegLogSigmoid(beta * z), 1e-12);
    EXPECT_NEAR(v.margin, beta * z, 1e-12);
    EXPECT_GE(v.value, 0.0);
    ASSERT_EQ(v.logratio_pos.size(), w.size());
    for (size_t t = 0; t < w.size(); ++t) EXPECT_NEAR(v.logratio_pos[t], w[t], 1e-12);
    EXPECT_EQ(static_cast<int>(v.grad.size()), Policy::dim());
  }
}

TEST(Losses, DpoToyValueAtUnitMargin) {
  // Move theta from the reference along f(h,y_w) - f(h,y_l) until
  // Dw - Dl = 1/beta; the loss is then -log sigmoid(1).
  PreferencePair pair = WithLength(RandomPair(12), 1);
  Rng rng(6);
  Policy r = RandomPolicy(rng);
  ReferencePolicy ref(r);
  const auto& hw = pair.positive().steps()[0];
  const auto& hl = pair.negative().steps()[0];
  ASSERT_NE(hw.action, hl.action);
  std::vector<double> dir = FeatureMap::Dense(hw.history, hw.action);
  const auto fl = FeatureMap::Dense(hl.history, hl.action);
  for (int i = 0; i < Policy::dim(); ++i) dir[i] -= fl[i];
  const double beta = 0.1;
  auto at = [&](double s) {
    Policy p = r;
    for (int i = 0; i < Policy::dim(); ++i) p.mutable_theta()[i] += s * dir[i];
    return p;
  };
  auto margin = [&](double s) { return DpoLoss(pair, at(s), ref, {beta, 0.99}).margin; };
  double lo = 0.0, hi = 1.0;
  while (margin(hi) < 1.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (margin(mid) < 1.0 ? lo : hi) = mid;
  }
  EXPECT_NEAR(DpoLoss(pair, at(hi), ref, {beta, 0.99}).value, 0.31326168751822286, 1e-9);
}

TEST(Losses, EtoUnequalLengthsFromLoggedLogProbs) {
  Rng rng(7);
  SessionPair sp = UnequalSessionPair(21, 3, 2);
  ASSERT_EQ(sp.positive().length(), 3);
  ASSERT_EQ(sp.negative().length(), 2);
  Policy p = RandomPolicy(rng);
  Policy r = RandomPolicy(rng);
  LossValue v = EtoLoss(sp, p, ReferencePolicy(r), {});
  // straight-line: the logged log-probs minus the reference's
  double z = 0.0;
  for (int t = 0; t < 3; ++t) {
    const auto& st = sp.positive().steps()[t];
    z += v.logprob_pos[t] - LogProb(r, st.history, st.action);
  }
  for (int t = 0; t < 2; ++t) {
    const auto& st = sp.negative().steps()[t];
    z -= v.logprob_neg[t] - LogProb(r, st.history, st.action);
  }
  EXPECT_NEAR(v.value, NaiveNegLogSigmoid(0.1 * z), 1e-12);
}

TEST(Losses, DmpoMatchesWeightedRecomputation) {
  Rng rng(8);
  for (uint64_t seed = 0; seed < 50; ++seed) {
    SessionPair sp = UnequalSessionPair(seed, 0, 0);
    Policy p = RandomPolicy(rng);
    Policy r = RandomPolicy(rng);
    const double gamma = 0.5 + 0.5 * rng.Uniform01();
    auto w = LogRatios(sp.positive(), p, r);
    auto l = LogRatios(sp.negative(), p, r);
    const int tw = static_cast<int>(w.size()), tl = static_cast<int>(l.size());
    double z = 0.0;
    for (int t = 0; t < tw; ++t) z += (1 - std::pow(gamma, tw - t)) / (1 - std::pow(gamma, tw)) * w[t];
    for (int t = 0; t < tl; ++t) z -= (1 - std::pow(gamma, tl - t)) / (1 - std::pow(gamma, tl)) * l[t];
    EXPECT_NEAR(DmpoLoss(sp, p, ReferencePolicy(r), {0.1, gamma}).value,
                NaiveNegLogSigmoid(0.1 * z), 1e-12);
    EXPECT_NEAR(DmpoLossFromLogRatios(w, l, 0.1, gamma), NaiveNegLogSigmoid(0.1 * z), 1e-12);
  }
}

TEST(Losses, DpoRejectsMultiRoundPairs) {
  for (uint64_t seed = 0;; ++seed) {
    PreferencePair pair = RandomPair(seed);
    if (pair.length() < 2) continue;
    try {
      DpoLoss(pair, Policy(), ReferencePolicy(Policy()), {});
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kArgument);
    }
    break;
  }
}

TEST(Losses, DmpoRejectsBadGamma) {
  SessionPair sp = UnequalSessionPair(3, 0, 0);
  try {
    DmpoLoss(sp, Policy(), ReferencePolicy(Policy()), {0.1, 1.2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
}

class GradientCheck : public ::testing::TestWithParam<const char*> {};

TEST_P(GradientCheck, MatchesCentralDifferences) {
  const std::string method = GetParam();
  Rng rng(9);
  for (uint64_t seed = 0; seed < 100; ++seed) {
    Policy p = RandomPolicy(rng);
    ReferencePolicy ref(RandomPolicy(rng));
    const LossConfig cfg{0.1 + rng.Uniform01(), 0.9};
    PreferencePair pair = RandomPair(seed);
    PreferencePair one = WithLength(pair, 1);
    SessionPair sp = ToSessionPair(pair);
    std::function<LossValue(const Policy&)> loss;
    if (method == "dpo") loss = [&](const Policy& q) { return DpoLoss(one, q, ref, cfg); };
    if (method == "sdpo") loss = [&](const Policy& q) { return SdpoLoss(pair, q, ref, cfg); };
    if (method == "eto") loss = [&](const Policy& q) { return EtoLoss(sp, q, ref, cfg); };
    if (method == "dmpo") loss = [&](const Policy& q) { return DmpoLoss(sp, q, ref, cfg); };
    ASSERT_LT(GradientRelativeError(loss, p), 1e-6) << method << " seed " << seed;
  }
}

INSTANTIATE_TEST_SUITE_P(AllLosses, GradientCheck,
                         ::testing::Values("dpo", "sdpo", "eto", "dmpo"));

TEST(DiscountWeight, Properties) {
  for (int T = 1; T <= 10; ++T) {
    for (double gamma : {0.1, 0.5, 0.9, 0.99, 1.0}) {
      EXPECT_EQ(DiscountWeight(0, T, gamma), 1.0);
      for (int t = 0; t < T; ++t) {
        const double w = DiscountWeight(t, T, gamma);
        EXPECT_GT(w, 0.0);
        EXPECT_LE(w, 1.0);
        if (t > 0 && gamma < 1.0) EXPECT_LT(w, DiscountWeight(t - 1, T, gamma));
      }
    }
    for (int t = 0; t < T; ++t) {
      EXPECT_NEAR(DiscountWeight(t, T, 1.0 - 1e-9), static_cast<double>(T - t) / T, 1e-6);
      EXPECT_DOUBLE_EQ(DiscountWeight(t, T, 1.0), static_cast<double>(T - t) / T);
    }
  }
}

TEST(Losses, EqualLengthShiftInvariance) {
  Rng rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const int L = 1 + static_cast<int>(rng.UniformInt(6));
    const int tl = L + 1 + static_cast<int>(rng.UniformInt(3));
    std::vector<double> w(L), l(L), lu(tl);
    for (double& x : w) x = rng.Uniform01() * 4 - 2;
    for (double& x : l) x = rng.Uniform01() * 4 - 2;
    for (double& x : lu) x = rng.Uniform01() * 4 - 2;
    for (double c : {0.1, -0.1, 1.0, -1.0}) {
      auto shift = [c](std::vector<double> v) {
        for (double& x : v) x += c;
        return v;
      };
      EXPECT_NEAR(SdpoLossFromLogRatios(shift(w), shift(l), 0.1), SdpoLossFromLogRatios(w, l, 0.1),
                  1e-12);
      const double moved = std::abs(EtoLossFromLogRatios(shift(w), shift(lu), 0.1) -
                                    EtoLossFromLogRatios(w, lu, 0.1));
      if (std::abs(c) == 0.1) EXPECT_GE(moved, 1e-3);
      EXPECT_GT(moved, 0.0);
    }
  }
}

TEST(Losses, SdpoMonotoneInEachLogRatio) {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int L = 1 + static_cast<int>(rng.UniformInt(5));
    std::vector<double> w(L), l(L);
    for (double& x : w) x = rng.Uniform01() * 6 - 3;
    for (double& x : l) x = rng.Uniform01() * 6 - 3;
    const double base = SdpoLossFromLogRatios(w, l, 0.1);
    const int t = static_cast<int>(rng.UniformInt(L));
    auto up = w;
    up[t] += 0.05;
    EXPECT_LT(SdpoLossFromLogRatios(up, l, 0.1), base);
    auto down = l;
    down[t] += 0.05;
    EXPECT_GT(SdpoLossFromLogRatios(w, down, 0.1), base);
  }
}

TEST(Losses, SdpoRespondsToPositiveActionNudge) {
  // raising log pi of a positive action through theta lowers the loss
  Rng rng(12);
  for (uint64_t seed = 0; seed < 30; ++seed) {
    PreferencePair pair = RandomPair(seed + 100);
    Policy p = RandomPolicy(rng);
    ReferencePolicy ref(RandomPolicy(rng));
    const auto& st = pair.positive().steps()[0];
    if (pair.negative().steps()[0].action == st.action) continue;
    // only the act-kind bias of the positive action's block changes; when the
    // negative's first act has the same kind the nudge is not isolated
    if (pair.negative().steps()[0].action.kind == st.action.kind) continue;
    LossValue before = SdpoLoss(pair, p, ref, {});
    Policy q = p;
    std::vector<double> g = GradLogProb(p, st.history, st.action);
    for (int i = 0; i < Policy::dim(); ++i) q.mutable_theta()[i] += 1e-4 * g[i];
    EXPECT_GT(LogProb(q, st.history, st.action), LogProb(p, st.history, st.action));
    // first-order change of the loss is -sigmoid(-z) * beta * (d logpi_w - ...)
    const double dz = 1e-4 * 0.1 * [&] {
      double s = 0.0;
      for (int i = 0; i < Policy::dim(); ++i) s += -before.grad[i] * g[i];
      return s;
    }();
    EXPECT_NEAR(SdpoLoss(pair, q, ref, {}).value - before.value, -dz / 0.1, 1e-8);
  }
}

TEST(Losses, AsymmetricSegmentsOnlyThroughTheEscapeHatch) {
  for (uint64_t seed = 0;; ++seed) {
    PreferencePair p = RandomPair(seed);
    const int pos_rounds = AgentRoundCount(p.positive().session(), p.perspective()) - p.start();
    if (pos_rounds < 2) continue;
    PreferencePair asym = ReshapePair(p, 1, 2);
    EXPECT_FALSE(asym.equal_length());
    EXPECT_EQ(asym.positive().length(), 2);
    EXPECT_EQ(asym.negative().length(), 1);
    LossValue v = SdpoLoss(asym, Policy(), ReferencePolicy(Policy()), {});
    EXPECT_NEAR(v.value, kLn2, 1e-12);
    break;
  }
}

// ---- tabular machinery ----

TEST(Occupancy, FirstStepIsInitialTimesPolicy) {
  Rng rng(20);
  TabularMdp m = RandomMdp(rng, 3, 2, 4);
  PolicyTable pi = RandomPolicyTable(rng, 3, 2);
  Occupancy d = OccupancyByEnumeration(m, pi, 0.9);
  for (int s = 0; s < 3; ++s) {
    for (int a = 0; a < 2; ++a) EXPECT_NEAR(d.at(s, a, 0), m.initial[s] * pi[s * 2 + a], 1e-15);
  }
}

TEST(Occupancy, DeterministicChainByHand) {
  // action a moves to state a; start in state 0; uniform policy
  TabularMdp m;
  m.num_states = 2;
  m.num_actions = 2;
  m.horizon = 2;
  m.initial = {1.0, 0.0};
  for (int s = 0; s < 2; ++s) {
    for (int a = 0; a < 2; ++a) {
      for (int s2 = 0; s2 < 2; ++s2) m.transition.push_back(s2 == a ? 1.0 : 0.0);
    }
  }
  PolicyTable pi(4, 0.5);
  Occupancy d = OccupancyByEnumeration(m, pi, 0.5);
  // four length-1 prefixes (s0=0, a0, s1=a0, a1), each of weight 1/2 * 1/2
  for (int s = 0; s < 2; ++s) {
    for (int a = 0; a < 2; ++a) EXPECT_DOUBLE_EQ(d.at(s, a, 1), 0.5 * 0.25);
  }
  EXPECT_DOUBLE_EQ(d.at(0, 0, 0), 0.5);
  EXPECT_DOUBLE_EQ(d.at(1, 0, 0), 0.0);
}

TEST(Occupancy, MassIsGammaPowerAndMethodsAgree) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const int S = 2 + static_cast<int>(rng.UniformInt(5));
    const int A = 1 + static_cast<int>(rng.UniformInt(3));
    const int H = 1 + static_cast<int>(rng.UniformInt(5));
    TabularMdp m = RandomMdp(rng, S, A, H);
    PolicyTable pi = RandomPolicyTable(rng, S, A);
    const double gamma = 0.3 + 0.7 * rng.Uniform01();
    Occupancy e = OccupancyByEnumeration(m, pi, gamma);
    Occupancy r = OccupancyByRecursion(m, pi, gamma);
    for (int t = 0; t < H; ++t) {
      EXPECT_NEAR(e.MassAt(t), std::pow(gamma, t), 1e-12);
      for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
          EXPECT_GE(e.at(s, a, t), 0.0);
          EXPECT_NEAR(e.at(s, a, t), r.at(s, a, t), 1e-14);
        }
      }
    }
  }
}

TEST(Occupancy, MonteCarloAgrees) {
  Rng rng(22);
  TabularMdp m = RandomMdp(rng, 3, 2, 4);
  PolicyTable pi = RandomPolicyTable(rng, 3, 2);
  const double gamma = 0.9;
  Occupancy d = OccupancyByEnumeration(m, pi, gamma);
  const int n = 200000;
  std::vector<double> counts(3 * 2 * 4, 0.0);
  Rng sim(23);
  for (int k = 0; k < n; ++k) {
    int s = sim.Categorical(m.initial);
    for (int t = 0; t < 4; ++t) {
      const int a = sim.Categorical(std::span<const double>(pi.data() + s * 2, 2));
      counts[(t * 3 + s) * 2 + a] += 1.0;
      std::vector<double> next(3);
      for (int s2 = 0; s2 < 3; ++s2) next[s2] = m.P(s, a, s2);
      s = sim.Categorical(next);
    }
  }
  for (int t = 0; t < 4; ++t) {
    for (int s = 0; s < 3; ++s) {
      for (int a = 0; a < 2; ++a) {
        const double p = counts[(t * 3 + s) * 2 + a] / n;
        const double se = std::pow(gamma, t) * std::sqrt(p * (1 - p) / n);
        EXPECT_LE(std::abs(std::pow(gamma, t) * p - d.at(s, a, t)), 3 * se + 1e-15);
      }
    }
  }
}

TEST(TabularMdp, ValidateRejectsBadTables) {
  Rng rng(24);
  TabularMdp m = RandomMdp(rng, 2, 2, 2);
  EXPECT_NO_THROW(m.Validate());
  TabularMdp bad = m;
  bad.initial[0] += 1e-9;
  EXPECT_THROW(bad.Validate(), Error);
  bad = m;
  bad.transition.pop_back();
  EXPECT_THROW(bad.Validate(), Error);
}

TEST(BtProbability, SymmetryAndIdentity) {
  Rng rng(25);
  std::vector<double> reward(6);
  for (double& r : reward) r = rng.Uniform01() * 4 - 2;
  for (int trial = 0; trial < 100; ++trial) {
    Trajectory w, l;
    for (int t = 0; t < 4; ++t) {
      w.states.push_back(static_cast<int>(rng.UniformInt(3)));
      w.actions.push_back(static_cast<int>(rng.UniformInt(2)));
      l.states.push_back(static_cast<int>(rng.UniformInt(3)));
      l.actions.push_back(static_cast<int>(rng.UniformInt(2)));
    }
    for (bool corrected : {false, true}) {
      EXPECT_NEAR(BtProbability(w, l, reward, 2, 0.8, corrected) +
                      BtProbability(l, w, reward, 2, 0.8, corrected),
                  1.0, 1e-12);
      EXPECT_DOUBLE_EQ(BtProbability(w, w, reward, 2, 0.8, corrected), 0.5);
    }
  }
}

TEST(BtProbability, DiscountMattersOnlyBeyondTheFirstStep) {
  // one state, two actions, r(a=0) = 0 and r(a=1) = 1
  const std::vector<double> reward = {0.0, 1.0};
  Trajectory late{{0, 0}, {0, 1}};   // reward 1 at t = 1
  Trajectory none{{0, 0}, {0, 0}};
  Trajectory early{{0, 0}, {1, 0}};  // reward 1 at t = 0
  const double g = 0.5;
  EXPECT_NEAR(BtProbability(late, none, reward, 2, g, false), Sigmoid(g), 1e-15);
  EXPECT_NEAR(BtProbability(late, none, reward, 2, g, true), Sigmoid(1.0), 1e-15);
  EXPECT_NE(BtProbability(late, none, reward, 2, g, false),
            BtProbability(late, none, reward, 2, g, true));
  EXPECT_DOUBLE_EQ(BtProbability(late, none, reward, 2, 1.0, false),
                   BtProbability(late, none, reward, 2, 1.0, true));
  EXPECT_DOUBLE_EQ(BtProbability(early, none, reward, 2, g, false),
                   BtProbability(early, none, reward, 2, g, true));
}

TEST(KlSolution, ClosedForm) {
  Rng rng(26);
  std::vector<double> d_ref(6), r(6);
  for (double& x : d_ref) x = 0.1 + rng.Uniform01();
  for (double& x : r) x = rng.Uniform01() * 2 - 1;
  const double beta = 0.3;
  KlSolution sol = SolveKlRegularized(d_ref, r, beta);
  double mass = 0.0, z = 0.0;
  for (size_t i = 0; i < 6; ++i) {
    mass += d_ref[i];
    z += d_ref[i] * std::exp(r[i] / beta);
  }
  for (size_t i = 0; i < 6; ++i) {
    EXPECT_NEAR(sol.d_star[i], mass * d_ref[i] * std::exp(r[i] / beta) / z, 1e-12);
  }
}

TEST(RewardIdentity, RecoversInputUpToConstant) {
  TabularMdp m;
  m.num_states = 2;
  m.num_actions = 2;
  m.horizon = 3;
  m.initial = {0.6, 0.4};
  m.transition = {0.7, 0.3, 0.2, 0.8, 0.5, 0.5, 0.1, 0.9};
  const PolicyTable ref = {0.5, 0.5, 0.3, 0.7};
  const std::vector<double> r = {1.0, -0.5, 0.25, 2.0};
  EXPECT_LT(RewardIdentityCheck(m, ref, r, 0.1, 0.9), 1e-8);
  EXPECT_LT(RewardIdentityCheck(m, ref, r, 1.0, 1.0), 1e-8);
  Rng rng(27);
  for (int trial = 0; trial < 20; ++trial) {
    TabularMdp big = RandomMdp(rng, 6, 3, 5);
    PolicyTable pi = RandomPolicyTable(rng, 6, 3);
    std::vector<double> rr(18);
    for (double& x : rr) x = rng.Uniform01() * 2 - 1;
    EXPECT_LT(RewardIdentityCheck(big, pi, rr, 0.5, 0.95), 1e-8);
  }
}

TEST(RewardIdentity, SamePolicyGivesConstantField) {
  Rng rng(28);
  TabularMdp m = RandomMdp(rng, 4, 2, 4);
  PolicyTable pi = RandomPolicyTable(rng, 4, 2);
  std::vector<bool> mask;
  std::vector<double> r = ImpliedReward(m, pi, pi, 0.5, 0.9, &mask);
  for (size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(r[i], 0.0, 1e-12);
}

TEST(RewardIdentity, LinearInBeta) {
  Rng rng(29);
  TabularMdp m = RandomMdp(rng, 3, 2, 3);
  PolicyTable star = RandomPolicyTable(rng, 3, 2);
  PolicyTable ref = RandomPolicyTable(rng, 3, 2);
  std::vector<bool> mask;
  auto r1 = ImpliedReward(m, star, ref, 0.2, 0.9, &mask);
  auto r2 = ImpliedReward(m, star, ref, 0.4, 0.9, &mask);
  std::vector<double> doubled(r1.size());
  for (size_t i = 0; i < r1.size(); ++i) doubled[i] = 2 * r1[i];
  EXPECT_LT(ResidualUpToConstant(r2, doubled, mask), 1e-12);
}

TEST(RewardIdentity, ZeroOccupancyEntries) {
  std::vector<bool> mask;
  auto r = RecoverReward(std::vector<double>{0.5, 0.0}, std::vector<double>{0.25, 0.0}, 1.0, &mask);
  EXPECT_TRUE(mask[0]);
  EXPECT_FALSE(mask[1]);
  EXPECT_NEAR(r[0], std::log(2.0), 1e-15);
  try {
    RecoverReward(std::vector<double>{0.5, 0.0}, std::vector<double>{0.25, 0.1}, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDomain);
  }
}

}  // namespace
}  // namespace segdpo
