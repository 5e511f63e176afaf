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

#ifndef SEGDPO_NEGOTIATION_H_
#define SEGDPO_NEGOTIATION_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "segdpo/core_types.h"
#include "segdpo/rng.h"

namespace segdpo {

// Scores from different scorer versions are not comparable.
inline constexpr const char* kScorerVersion = "negotiation-scorer-v1";

// A multi-issue split-the-pool negotiation instance.
struct Scenario {
  uint64_t seed = 0;
  std::string id;
  std::vector<int> pool;
  std::array<std::vector<int>, 2> valuations;
  // Cosine similarity of the two parties' pool-weighted valuation vectors;
  // 1 means both want exactly the same things.
  double hardness = 0.0;
  int max_rounds = kDefaultMaxRounds;

  Background BackgroundFor(Role r) const;
  void Validate() const;
};

double ValuationConflict(std::span<const int> pool, std::span<const int> first,
                         std::span<const int> second);

// Builds and validates a scenario; hardness is derived from the valuations.
Scenario MakeScenario(std::string id, std::vector<int> pool,
                      std::vector<int> valuations_first,
                      std::vector<int> valuations_second,
                      int max_rounds = kDefaultMaxRounds, uint64_t seed = 0);

Scenario GenerateScenario(uint64_t seed, int max_rounds = kDefaultMaxRounds);
std::vector<Scenario> GenerateScenarios(int n, uint64_t seed,
                                        int max_rounds = kDefaultMaxRounds);
Scenario ScenarioFromSession(const Session& session);

// True for the top quantile of scenarios by hardness (ties broken by index).
std::vector<bool> HardMask(std::span<const Scenario> scenarios, double quantile);

struct StandingOffer {
  Role proposer;
  std::vector<int> claim;
};

// The most recent offer in the transcript, if any. Accept is only legal for
// the party that did not make it.
std::optional<StandingOffer> CurrentStandingOffer(std::span<const Turn> turns);

// Every feasible claim over the pool in lexicographic order.
std::vector<std::vector<int>> AllClaims(std::span<const int> pool);

// Legal moves in a fixed order: offers (lexicographic), Accept when an
// opposing offer stands, then Insist, Concede, SmallTalk, Threaten.
std::vector<DialogueAct> EnumerateActions(const History& history);
bool IsLegal(const History& history, const DialogueAct& act);

// In-progress dialogue. Keeps one History per party, growing in place.
class Dialogue {
 public:
  // horizon == 0 means the full 2 * max_rounds turn budget.
  Dialogue(const Scenario& scenario, Role agent_role, std::string partner,
           int horizon = 0);

  Role ToMove() const;
  const History& HistoryFor(Role r) const { return histories_[RoleIndex(r)]; }
  const std::vector<Turn>& turns() const { return histories_[0].turns; }
  const std::optional<std::vector<int>>& deal() const { return deal_; }
  int horizon() const { return horizon_; }
  bool IsTerminal() const;

  // Throws kState once terminal and kRule for an illegal act.
  void Apply(const DialogueAct& act);

  // Scored transcript. Throws kState if the dialogue is still running.
  Session ToSession() const;

 private:
  std::array<History, 2> histories_;
  Role agent_role_;
  std::string partner_;
  int horizon_;
  std::optional<std::vector<int>> deal_;
};

bool IsTerminal(const Session& session);

// Deterministic rule-based evaluation of a finished transcript. Goal is the
// share of the party's pool value it ends up with, on a 0..10 scale (0 with
// no deal). Relationship: +1 per own Concede or reciprocated SmallTalk, -1 per
// own Insist after round 3 or own Threaten, clamped to [-5, 5].
std::array<Scores, 2> Score(const Session& session);

// Relationship events for one party before clamping.
int RelationshipEvents(std::span<const Turn> turns, Role party);

// Scripted demonstrator. Opens by claiming everything it values, concedes
// along a fixed schedule toward items the opponent asks for, accepts once an
// offer clears a threshold that decays with the round, reciprocates small
// talk and never threatens.
DialogueAct ExpertAct(const History& history);
int ExpertAcceptPercent(int round);
int ExpertTargetPercent(int round);

// Highest opponent-friendly claim that still keeps target_percent of the
// party's pool value. Ties go to the higher own value, then lexicographic.
std::vector<int> ClaimAtTarget(const Background& background, int target_percent,
                               const std::vector<int>* opponent_claim);

struct Persona {
  enum class Kind { kCooperative, kStubborn, kTempered };
  Kind kind = Kind::kCooperative;
  double temperature = 0.7;

  static Persona Cooperative() { return {Kind::kCooperative, 0.7}; }
  static Persona Stubborn() { return {Kind::kStubborn, 0.7}; }
  static Persona Tempered(double t) { return {Kind::kTempered, t}; }

  // "cooperative", "stubborn" or "tempered:<temperature>".
  static Persona Parse(std::string_view name);
  std::string Name() const;
};

DialogueAct PersonaAct(const Persona& persona, const History& history, Rng& rng);

// Fixed logits of the tempered persona, one per act, before temperature.
std::vector<double> TemperedLogits(const History& history,
                                   std::span<const DialogueAct> acts);

}  // namespace segdpo

#endif  // SEGDPO_NEGOTIATION_H_
