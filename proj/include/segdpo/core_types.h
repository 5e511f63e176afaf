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

#ifndef SEGDPO_CORE_TYPES_H_
#define SEGDPO_CORE_TYPES_H_

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "segdpo/dialogue_act.h"

namespace segdpo {

inline constexpr int kMaxItemTypes = 3;
inline constexpr int kMaxItemQuantity = 3;
inline constexpr int kDefaultMaxRounds = 20;

// What one party knows before the dialogue starts.
struct Background {
  std::string scenario_id;
  Role role = Role::kFirst;
  std::vector<int> pool;
  std::vector<int> valuations;
  std::string goal_text;
  int max_rounds = kDefaultMaxRounds;

  // Throws ErrorKind::kArgument when an invariant is violated.
  void Validate() const;

  int ValueOf(std::span<const int> allocation) const;
  int PoolValue() const { return ValueOf(pool); }

  bool operator==(const Background&) const = default;
};

enum class Speaker { kAgent, kInterlocutor };

struct Turn {
  int index = 0;
  Role speaker = Role::kFirst;
  DialogueAct act;

  bool operator==(const Turn&) const = default;
};

inline Speaker SpeakerFor(const Turn& turn, Role perspective) {
  return turn.speaker == perspective ? Speaker::kAgent : Speaker::kInterlocutor;
}

// The context one party faces right before producing its next output: its
// own background plus every transcript turn so far.
struct History {
  Background background;
  std::vector<Turn> turns;

  Role self() const { return background.role; }
  // Number of outputs this party has already produced.
  int OwnRound() const;

  bool operator==(const History&) const = default;
};

class Scores {
 public:
  static constexpr int kMinGoal = 0;
  static constexpr int kMaxGoal = 10;
  static constexpr int kMinRelationship = -5;
  static constexpr int kMaxRelationship = 5;

  Scores() = default;
  // Throws ErrorKind::kRange when outside [0,10] x [-5,5].
  Scores(int goal, int relationship);

  int goal() const { return goal_; }
  int relationship() const { return relationship_; }

  bool operator==(const Scores&) const = default;

 private:
  int goal_ = 0;
  int relationship_ = 0;
};

// A finished two-party transcript. Per-party arrays are indexed by RoleIndex.
struct Session {
  std::array<Background, 2> backgrounds;
  std::vector<Turn> turns;
  std::array<Scores, 2> scores;
  // Quantities held by the first speaker after an accepted offer.
  std::optional<std::vector<int>> deal;
  // The party whose outputs are being trained or evaluated.
  Role agent_role = Role::kFirst;
  // Interlocutor descriptor, e.g. "self", "cooperative", "tempered:0.7".
  std::string partner;
  // Turn budget in effect (2 * max_rounds unless the run truncated it).
  int horizon = 2 * kDefaultMaxRounds;
  std::string scorer_version;

  const std::string& scenario_id() const { return backgrounds[0].scenario_id; }
  int max_rounds() const { return backgrounds[0].max_rounds; }
  const Background& background(Role r) const { return backgrounds[RoleIndex(r)]; }
  const Scores& score(Role r) const { return scores[RoleIndex(r)]; }

  // Structural checks: alternation, length bounds, deal feasibility.
  void Validate() const;

  bool operator==(const Session&) const = default;
};

// Transcript turns preceding a party's output in the given round: 2n when it
// speaks first, 2n + 1 when it speaks second.
inline constexpr int HistoryLength(int agent_round, Role perspective) {
  return 2 * agent_round + (perspective == Role::kSecond ? 1 : 0);
}

// Number of outputs the party produced in the transcript.
int AgentRoundCount(const Session& session, Role perspective);

// Throws ErrorKind::kRange when the history is not contained in the
// transcript.
History HistoryAt(const Session& session, int agent_round, Role perspective);

// One agent output together with the context it was produced in.
struct SegmentStep {
  History history;
  DialogueAct action;
};

// Contiguous agent rounds [start, start + length) of a session.
class Segment {
 public:
  Segment(std::shared_ptr<const Session> session, Role perspective, int start,
          int length, std::vector<SegmentStep> steps);

  const Session& session() const { return *session_; }
  const std::shared_ptr<const Session>& session_ptr() const { return session_; }
  Role perspective() const { return perspective_; }
  int start() const { return start_; }
  int length() const { return length_; }
  std::span<const SegmentStep> steps() const { return steps_; }

 private:
  std::shared_ptr<const Session> session_;
  Role perspective_;
  int start_;
  int length_;
  std::vector<SegmentStep> steps_;
};

// Throws kArgument for length < 1 or start < 0, kRange when the segment
// would run past the party's last round.
Segment ExtractSegment(std::shared_ptr<const Session> session, int start,
                       int length, Role perspective);

// All of the party's outputs, in order.
Segment WholeSession(std::shared_ptr<const Session> session, Role perspective);

enum class Provenance { kSelfChat, kCrossPlay };
const char* ProvenanceName(Provenance p);
Provenance ProvenanceFromName(std::string_view name);

// Number of leading transcript turns identical in both sessions.
int SharedPrefixLength(const Session& a, const Session& b);

// Matched positive/negative segments. Both start at the same agent round and
// the transcripts agree on every turn before it. Lengths must be equal unless
// the pair was built with allow_unequal_lengths (asymmetric ablation only).
class PreferencePair {
 public:
  // Throws ErrorKind::kArgument when an invariant does not hold.
  PreferencePair(Segment positive, Segment negative, Provenance provenance,
                 bool allow_unequal_lengths = false);

  const Segment& positive() const { return positive_; }
  const Segment& negative() const { return negative_; }
  int start() const { return positive_.start(); }
  int length() const { return positive_.length(); }
  bool equal_length() const { return positive_.length() == negative_.length(); }
  int shared_prefix_len() const { return shared_prefix_len_; }
  Provenance provenance() const { return provenance_; }
  Role perspective() const { return positive_.perspective(); }
  const Scores& scores_pos() const { return positive_.session().score(perspective()); }
  const Scores& scores_neg() const { return negative_.session().score(perspective()); }
  const std::string& scenario_id() const { return positive_.session().scenario_id(); }

 private:
  Segment positive_;
  Segment negative_;
  Provenance provenance_;
  int shared_prefix_len_;
};

// Whole-session pair used by the session-level objectives. Lengths and
// openings may differ; only the scenario and the perspective are shared.
class SessionPair {
 public:
  SessionPair(std::shared_ptr<const Session> positive,
              std::shared_ptr<const Session> negative, Role perspective,
              Provenance provenance);

  const Segment& positive() const { return positive_; }
  const Segment& negative() const { return negative_; }
  Role perspective() const { return positive_.perspective(); }
  Provenance provenance() const { return provenance_; }
  const Scores& scores_pos() const { return positive_.session().score(perspective()); }
  const Scores& scores_neg() const { return negative_.session().score(perspective()); }
  const std::string& scenario_id() const { return positive_.session().scenario_id(); }

 private:
  Segment positive_;
  Segment negative_;
  Provenance provenance_;
};

// Re-cuts a pair's sessions with the given negative/positive lengths from the
// same start round (lengths are clamped to what each session offers).
PreferencePair ReshapePair(const PreferencePair& pair, int negative_length,
                           int positive_length);

}  // namespace segdpo

#endif  // SEGDPO_CORE_TYPES_H_
