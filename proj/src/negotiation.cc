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

#include "segdpo/negotiation.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <utility>

#include "segdpo/error.h"

namespace segdpo {

namespace {

// Value a party gets from the opponent's claim: everything not claimed.
int ValueOfRemainder(const Background& b, const std::vector<int>& opponent_claim) {
  int v = 0;
  for (size_t i = 0; i < b.pool.size(); ++i) {
    v += (b.pool[i] - opponent_claim[i]) * b.valuations[i];
  }
  return v;
}

// Percent comparisons stay in integers so thresholds are exact.
bool AtLeastPercent(int value, int total, int percent) {
  return 100 * value >= percent * total;
}

const Turn* LastTurnBy(std::span<const Turn> turns, Role who) {
  for (auto it = turns.rbegin(); it != turns.rend(); ++it) {
    if (it->speaker == who) return &*it;
  }
  return nullptr;
}

std::optional<ActKind> LastKindBy(std::span<const Turn> turns, Role who) {
  const Turn* t = LastTurnBy(turns, who);
  if (t == nullptr) return std::nullopt;
  return t->act.kind;
}

// The opponent's act immediately before this party's turn, if any.
std::optional<ActKind> OpponentLastKind(const History& h) {
  if (h.turns.empty() || h.turns.back().speaker == h.self()) return std::nullopt;
  return h.turns.back().act.kind;
}

int CountKindBy(std::span<const Turn> turns, Role who, ActKind kind) {
  int n = 0;
  for (const Turn& t : turns) n += (t.speaker == who && t.act.kind == kind);
  return n;
}

const std::vector<int>* LastClaimBy(std::span<const Turn> turns, Role who) {
  for (auto it = turns.rbegin(); it != turns.rend(); ++it) {
    if (it->speaker == who && it->act.kind == ActKind::kOffer) return &it->act.claim;
  }
  return nullptr;
}

}  // namespace

Background Scenario::BackgroundFor(Role r) const {
  Background b;
  b.scenario_id = id;
  b.role = r;
  b.pool = pool;
  b.valuations = valuations[RoleIndex(r)];
  b.max_rounds = max_rounds;
  std::string text = "Split the pool (";
  for (size_t i = 0; i < pool.size(); ++i) {
    if (i > 0) text += ", ";
    text += std::to_string(pool[i]) + " x item" + std::to_string(i) + " @" +
            std::to_string(b.valuations[i]);
  }
  text += ") and keep as much value as possible.";
  b.goal_text = std::move(text);
  return b;
}

void Scenario::Validate() const {
  BackgroundFor(Role::kFirst).Validate();
  BackgroundFor(Role::kSecond).Validate();
}

double ValuationConflict(std::span<const int> pool, std::span<const int> first,
                         std::span<const int> second) {
  double dot = 0.0, n1 = 0.0, n2 = 0.0;
  for (size_t i = 0; i < pool.size(); ++i) {
    const double a = static_cast<double>(pool[i]) * first[i];
    const double b = static_cast<double>(pool[i]) * second[i];
    dot += a * b;
    n1 += a * a;
    n2 += b * b;
  }
  if (n1 == 0.0 || n2 == 0.0) return 0.0;
  return dot / std::sqrt(n1 * n2);
}

Scenario MakeScenario(std::string id, std::vector<int> pool,
                      std::vector<int> valuations_first,
                      std::vector<int> valuations_second, int max_rounds,
                      uint64_t seed) {
  Scenario s;
  s.seed = seed;
  s.id = std::move(id);
  s.pool = std::move(pool);
  s.valuations = {std::move(valuations_first), std::move(valuations_second)};
  s.max_rounds = max_rounds;
  s.Validate();
  s.hardness = ValuationConflict(s.pool, s.valuations[0], s.valuations[1]);
  return s;
}

Scenario GenerateScenario(uint64_t seed, int max_rounds) {
  Rng rng(DeriveSeed(seed, {0x5ce7a210ULL}));
  for (;;) {
    std::vector<int> pool(kMaxItemTypes), v1(kMaxItemTypes), v2(kMaxItemTypes);
    for (int i = 0; i < kMaxItemTypes; ++i) {
      pool[i] = 1 + static_cast<int>(rng.UniformInt(kMaxItemQuantity));
      v1[i] = static_cast<int>(rng.UniformInt(6));
      v2[i] = static_cast<int>(rng.UniformInt(6));
    }
    const auto positive = [](const std::vector<int>& v) {
      return std::any_of(v.begin(), v.end(), [](int x) { return x > 0; });
    };
    if (!positive(v1) || !positive(v2)) continue;
    char id[32];
    std::snprintf(id, sizeof(id), "scn-%016llx", static_cast<unsigned long long>(seed));
    return MakeScenario(id, std::move(pool), std::move(v1), std::move(v2),
                        max_rounds, seed);
  }
}

std::vector<Scenario> GenerateScenarios(int n, uint64_t seed, int max_rounds) {
  std::vector<Scenario> out;
  out.reserve(std::max(n, 0));
  for (int k = 0; k < n; ++k) {
    out.push_back(GenerateScenario(DeriveSeed(seed, {static_cast<uint64_t>(k)}),
                                   max_rounds));
  }
  return out;
}

Scenario ScenarioFromSession(const Session& session) {
  const Background& a = session.background(Role::kFirst);
  const Background& b = session.background(Role::kSecond);
  return MakeScenario(a.scenario_id, a.pool, a.valuations, b.valuations,
                      a.max_rounds);
}

std::vector<bool> HardMask(std::span<const Scenario> scenarios, double quantile) {
  const size_t n = scenarios.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return scenarios[a].hardness > scenarios[b].hardness;
  });
  const size_t k = static_cast<size_t>(std::ceil(quantile * static_cast<double>(n)));
  std::vector<bool> mask(n, false);
  for (size_t i = 0; i < std::min(k, n); ++i) mask[order[i]] = true;
  return mask;
}

std::optional<StandingOffer> CurrentStandingOffer(std::span<const Turn> turns) {
  for (auto it = turns.rbegin(); it != turns.rend(); ++it) {
    if (it->act.kind == ActKind::kOffer) return StandingOffer{it->speaker, it->act.claim};
  }
  return std::nullopt;
}

std::vector<std::vector<int>> AllClaims(std::span<const int> pool) {
  std::vector<std::vector<int>> out;
  std::vector<int> claim(pool.size(), 0);
  for (;;) {
    out.push_back(claim);
    int i = static_cast<int>(pool.size()) - 1;
    while (i >= 0 && claim[i] == pool[i]) {
      claim[i] = 0;
      --i;
    }
    if (i < 0) break;
    ++claim[i];
  }
  return out;
}

std::vector<DialogueAct> EnumerateActions(const History& history) {
  std::vector<DialogueAct> acts;
  for (auto& c : AllClaims(history.background.pool)) {
    acts.push_back(DialogueAct::Offer(std::move(c)));
  }
  auto standing = CurrentStandingOffer(history.turns);
  if (standing && standing->proposer != history.self()) {
    acts.push_back(DialogueAct::Accept());
  }
  acts.push_back(DialogueAct::Insist());
  acts.push_back(DialogueAct::Concede());
  acts.push_back(DialogueAct::SmallTalk());
  acts.push_back(DialogueAct::Threaten());
  return acts;
}

bool IsLegal(const History& history, const DialogueAct& act) {
  const auto& pool = history.background.pool;
  switch (act.kind) {
    case ActKind::kOffer:
      if (act.claim.size() != pool.size()) return false;
      for (size_t i = 0; i < pool.size(); ++i) {
        if (act.claim[i] < 0 || act.claim[i] > pool[i]) return false;
      }
      return true;
    case ActKind::kAccept: {
      auto standing = CurrentStandingOffer(history.turns);
      return standing && standing->proposer != history.self() && act.claim.empty();
    }
    default:
      return act.claim.empty();
  }
}

Dialogue::Dialogue(const Scenario& scenario, Role agent_role, std::string partner,
                   int horizon)
    : agent_role_(agent_role),
      partner_(std::move(partner)),
      horizon_(horizon == 0 ? 2 * scenario.max_rounds : horizon) {
  scenario.Validate();
  if (horizon_ < 1 || horizon_ > 2 * scenario.max_rounds) {
    Fail(ErrorKind::kArgument, "horizon outside [1, 2 * max_rounds]");
  }
  histories_[0].background = scenario.BackgroundFor(Role::kFirst);
  histories_[1].background = scenario.BackgroundFor(Role::kSecond);
}

Role Dialogue::ToMove() const {
  return turns().size() % 2 == 0 ? Role::kFirst : Role::kSecond;
}

bool Dialogue::IsTerminal() const {
  return deal_.has_value() || static_cast<int>(turns().size()) >= horizon_;
}

void Dialogue::Apply(const DialogueAct& act) {
  if (IsTerminal()) Fail(ErrorKind::kState, "dialogue already finished");
  const Role who = ToMove();
  const History& h = HistoryFor(who);
  if (!IsLegal(h, act)) {
    Fail(ErrorKind::kRule, std::string("illegal act ") + act.ToString() +
                               " for the " + RoleName(who) + " speaker");
  }
  if (act.kind == ActKind::kAccept) {
    auto standing = CurrentStandingOffer(h.turns);
    std::vector<int> first_share = standing->claim;
    if (standing->proposer != Role::kFirst) {
      for (size_t i = 0; i < first_share.size(); ++i) {
        first_share[i] = h.background.pool[i] - first_share[i];
      }
    }
    deal_ = std::move(first_share);
  }
  Turn t{static_cast<int>(turns().size()), who, act};
  histories_[0].turns.push_back(t);
  histories_[1].turns.push_back(std::move(t));
}

Session Dialogue::ToSession() const {
  if (!IsTerminal()) Fail(ErrorKind::kState, "dialogue is not finished");
  Session s;
  s.backgrounds = {histories_[0].background, histories_[1].background};
  s.turns = turns();
  s.deal = deal_;
  s.agent_role = agent_role_;
  s.partner = partner_;
  s.horizon = horizon_;
  s.scorer_version = kScorerVersion;
  s.scores = Score(s);
  return s;
}

bool IsTerminal(const Session& session) {
  if (session.deal.has_value()) {
    return true;
  }
  return static_cast<int>(session.turns.size()) >= session.horizon;
}

int RelationshipEvents(std::span<const Turn> turns, Role party) {
  int events = 0;
  int own_round = 0;
  for (size_t i = 0; i < turns.size(); ++i) {
    if (turns[i].speaker != party) continue;
    switch (turns[i].act.kind) {
      case ActKind::kConcede:
        ++events;
        break;
      case ActKind::kSmallTalk: {
        const bool answered = i + 1 < turns.size() &&
                              turns[i + 1].act.kind == ActKind::kSmallTalk;
        const bool answering = i > 0 && turns[i - 1].act.kind == ActKind::kSmallTalk;
        if (answered || answering) ++events;
        break;
      }
      case ActKind::kInsist:
        if (own_round > 3) --events;
        break;
      case ActKind::kThreaten:
        --events;
        break;
      default:
        break;
    }
    ++own_round;
  }
  return events;
}

std::array<Scores, 2> Score(const Session& session) {
  if (!IsTerminal(session)) {
    Fail(ErrorKind::kState, "cannot score an unfinished session");
  }
  std::array<Scores, 2> out;
  for (Role r : {Role::kFirst, Role::kSecond}) {
    const Background& b = session.background(r);
    int goal = 0;
    if (session.deal.has_value()) {
      std::vector<int> share = *session.deal;
      if (r == Role::kSecond) {
        for (size_t i = 0; i < share.size(); ++i) share[i] = b.pool[i] - share[i];
      }
      const int v = b.ValueOf(share);
      const int total = b.PoolValue();
      // round(10 v / total), halves rounded up
      goal = (20 * v + total) / (2 * total);
    }
    const int rel = std::clamp(RelationshipEvents(session.turns, r),
                               Scores::kMinRelationship, Scores::kMaxRelationship);
    out[RoleIndex(r)] = Scores(goal, rel);
  }
  return out;
}

int ExpertAcceptPercent(int round) { return std::max(40, 95 - 5 * round); }
int ExpertTargetPercent(int round) { return std::max(50, 100 - 10 * round); }

std::vector<int> ClaimAtTarget(const Background& b, int target_percent,
                               const std::vector<int>* opponent_claim) {
  const int total = b.PoolValue();
  std::vector<double> weight(b.pool.size(), 1.0);
  if (opponent_claim != nullptr) {
    for (size_t i = 0; i < b.pool.size(); ++i) {
      if (b.pool[i] > 0) {
        weight[i] += 2.0 * (*opponent_claim)[i] / static_cast<double>(b.pool[i]);
      }
    }
  }
  std::vector<int> best;
  double best_score = -1.0;
  int best_value = -1;
  for (const auto& c : AllClaims(b.pool)) {
    const int v = b.ValueOf(c);
    if (!AtLeastPercent(v, total, target_percent)) continue;
    double score = 0.0;
    for (size_t i = 0; i < c.size(); ++i) score += (b.pool[i] - c[i]) * weight[i];
    if (score > best_score + 1e-12 ||
        (std::abs(score - best_score) <= 1e-12 && v > best_value)) {
      best = c;
      best_score = score;
      best_value = v;
    }
  }
  return best;
}

DialogueAct ExpertAct(const History& h) {
  const Background& b = h.background;
  const Role self = h.self();
  const int round = h.OwnRound();
  auto standing = CurrentStandingOffer(h.turns);
  if (standing && standing->proposer != self &&
      AtLeastPercent(ValueOfRemainder(b, standing->claim), b.PoolValue(),
                     ExpertAcceptPercent(round))) {
    return DialogueAct::Accept();
  }
  const auto last_opp = OpponentLastKind(h);
  const auto last_own = LastKindBy(h.turns, self);
  if (last_opp == ActKind::kSmallTalk && last_own != ActKind::kSmallTalk) {
    return DialogueAct::SmallTalk();
  }
  if (round == 1 && last_own == ActKind::kOffer) return DialogueAct::Concede();
  return DialogueAct::Offer(ClaimAtTarget(b, ExpertTargetPercent(round),
                                          LastClaimBy(h.turns, Other(self))));
}

Persona Persona::Parse(std::string_view name) {
  if (name == "cooperative") return Cooperative();
  if (name == "stubborn") return Stubborn();
  constexpr std::string_view kTempered = "tempered";
  if (name.substr(0, kTempered.size()) == kTempered) {
    std::string_view rest = name.substr(kTempered.size());
    double t = 0.7;
    if (!rest.empty()) {
      if (rest.front() != ':' && rest.front() != '(') {
        Fail(ErrorKind::kConfig, "bad persona '" + std::string(name) + "'");
      }
      std::string num(rest.substr(1));
      if (!num.empty() && num.back() == ')') num.pop_back();
      try {
        t = std::stod(num);
      } catch (const std::exception&) {
        Fail(ErrorKind::kConfig, "bad persona temperature in '" + std::string(name) + "'");
      }
    }
    if (!(t > 0.0)) Fail(ErrorKind::kConfig, "persona temperature must be positive");
    return Tempered(t);
  }
  Fail(ErrorKind::kConfig, "unknown persona '" + std::string(name) + "'");
}

std::string Persona::Name() const {
  switch (kind) {
    case Kind::kCooperative: return "cooperative";
    case Kind::kStubborn: return "stubborn";
    case Kind::kTempered: {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "tempered:%g", temperature);
      return buf;
    }
  }
  return "unknown";
}

namespace {

DialogueAct CooperativeAct(const History& h) {
  const Background& b = h.background;
  const Role self = h.self();
  const Role opp = Other(self);
  const int round = h.OwnRound();
  const int concessions = CountKindBy(h.turns, opp, ActKind::kConcede);
  const int threats = CountKindBy(h.turns, opp, ActKind::kThreaten);
  const auto last_opp = OpponentLastKind(h);
  const auto last_own = LastKindBy(h.turns, self);
  if (last_opp == ActKind::kConcede && last_own != ActKind::kConcede) {
    return DialogueAct::Concede();
  }
  if (last_opp == ActKind::kSmallTalk && last_own != ActKind::kSmallTalk) {
    return DialogueAct::SmallTalk();
  }
  auto standing = CurrentStandingOffer(h.turns);
  if (standing && standing->proposer != self) {
    const int thr = std::min(100, std::max(20, 60 - 10 * round - 10 * concessions) +
                                      25 * threats);
    if (AtLeastPercent(ValueOfRemainder(b, standing->claim), b.PoolValue(), thr)) {
      return DialogueAct::Accept();
    }
  }
  const int target =
      std::min(100, std::max(40, 80 - 10 * round - 10 * concessions) + 20 * threats);
  return DialogueAct::Offer(ClaimAtTarget(b, target, LastClaimBy(h.turns, opp)));
}

DialogueAct StubbornAct(const History& h) {
  const Background& b = h.background;
  const Role self = h.self();
  const int round = h.OwnRound();
  const bool late = round >= b.max_rounds - 2;
  auto standing = CurrentStandingOffer(h.turns);
  if (standing && standing->proposer != self &&
      AtLeastPercent(ValueOfRemainder(b, standing->claim), b.PoolValue(),
                     late ? 50 : 80)) {
    return DialogueAct::Accept();
  }
  if (late) {
    if (CountKindBy(h.turns, self, ActKind::kConcede) == 0) return DialogueAct::Concede();
    return DialogueAct::Offer(ClaimAtTarget(b, 60, LastClaimBy(h.turns, Other(self))));
  }
  if (standing && standing->proposer == self) return DialogueAct::Insist();
  return DialogueAct::Offer(ClaimAtTarget(b, 100, nullptr));
}

}  // namespace

std::vector<double> TemperedLogits(const History& h, std::span<const DialogueAct> acts) {
  const Background& b = h.background;
  const int round = h.OwnRound();
  const double total = b.PoolValue();
  const double target = std::max(0.5, 0.9 - 0.05 * round);
  const double accept_at = std::max(0.4, 0.8 - 0.05 * round);
  const auto last_opp = OpponentLastKind(h);
  auto standing = CurrentStandingOffer(h.turns);
  std::vector<double> logits;
  logits.reserve(acts.size());
  for (const DialogueAct& a : acts) {
    switch (a.kind) {
      case ActKind::kOffer:
        logits.push_back(3.0 - 12.0 * std::abs(b.ValueOf(a.claim) / total - target));
        break;
      case ActKind::kAccept:
        logits.push_back(2.0 + 10.0 * (ValueOfRemainder(b, standing->claim) / total -
                                       accept_at));
        break;
      case ActKind::kInsist:
        logits.push_back(0.5);
        break;
      case ActKind::kConcede:
        logits.push_back(last_opp == ActKind::kConcede ? 1.5 : -0.5);
        break;
      case ActKind::kSmallTalk:
        logits.push_back(last_opp == ActKind::kSmallTalk ? 2.0 : -1.0);
        break;
      case ActKind::kThreaten:
        logits.push_back(-2.0);
        break;
    }
  }
  return logits;
}

DialogueAct PersonaAct(const Persona& persona, const History& history, Rng& rng) {
  switch (persona.kind) {
    case Persona::Kind::kCooperative:
      return CooperativeAct(history);
    case Persona::Kind::kStubborn:
      return StubbornAct(history);
    case Persona::Kind::kTempered: {
      std::vector<DialogueAct> acts = EnumerateActions(history);
      std::vector<double> logits = TemperedLogits(history, acts);
      double mx = *std::max_element(logits.begin(), logits.end());
      std::vector<double> p(logits.size());
      double z = 0.0;
      for (size_t i = 0; i < p.size(); ++i) {
        p[i] = std::exp((logits[i] - mx) / persona.temperature);
        z += p[i];
      }
      for (double& x : p) x /= z;
      return acts[rng.Categorical(p)];
    }
  }
  Fail(ErrorKind::kArgument, "unknown persona kind");
}

}  // namespace segdpo
