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

#include "segdpo/core_types.h"

#include <algorithm>
#include <string>
#include <utility>

#include "segdpo/error.h"

namespace segdpo {

const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kRange: return "range";
    case ErrorKind::kArgument: return "argument";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kRule: return "rule";
    case ErrorKind::kState: return "state";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kDomain: return "domain";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kNumeric: return "numeric";
    case ErrorKind::kLoad: return "load";
    case ErrorKind::kNetwork: return "network";
    case ErrorKind::kAuth: return "auth";
    case ErrorKind::kJudgeFormat: return "judge-format";
  }
  return "unknown";
}

const char* RoleName(Role r) { return r == Role::kFirst ? "first" : "second"; }

Role RoleFromName(std::string_view name) {
  if (name == "first") return Role::kFirst;
  if (name == "second") return Role::kSecond;
  Fail(ErrorKind::kParse, "unknown role '" + std::string(name) + "'");
}

namespace {
constexpr const char* kActKindNames[kNumActKinds] = {
    "offer", "accept", "insist", "concede", "small_talk", "threaten"};
}  // namespace

const char* ActKindName(ActKind kind) {
  return kActKindNames[static_cast<int>(kind)];
}

ActKind ActKindFromName(std::string_view name) {
  for (int k = 0; k < kNumActKinds; ++k) {
    if (name == kActKindNames[k]) return static_cast<ActKind>(k);
  }
  Fail(ErrorKind::kParse, "unknown act kind '" + std::string(name) + "'");
}

std::string DialogueAct::ToString() const {
  std::string s = ActKindName(kind);
  if (kind == ActKind::kOffer) {
    s += "(";
    for (size_t i = 0; i < claim.size(); ++i) {
      if (i > 0) s += ",";
      s += std::to_string(claim[i]);
    }
    s += ")";
  }
  return s;
}

void Background::Validate() const {
  if (pool.empty() || pool.size() > kMaxItemTypes) {
    Fail(ErrorKind::kArgument, "pool must have 1.." +
                                   std::to_string(kMaxItemTypes) + " item types");
  }
  if (valuations.size() != pool.size()) {
    Fail(ErrorKind::kArgument, "valuations and pool differ in length");
  }
  int total = 0;
  for (int q : pool) {
    if (q < 0 || q > kMaxItemQuantity) {
      Fail(ErrorKind::kArgument, "item quantity out of [0, 3]");
    }
    total += q;
  }
  if (total == 0) Fail(ErrorKind::kArgument, "pool is empty");
  for (int v : valuations) {
    if (v < 0) Fail(ErrorKind::kArgument, "negative valuation");
  }
  if (PoolValue() <= 0) {
    Fail(ErrorKind::kArgument, "pool is worthless to the " +
                                   std::string(RoleName(role)) + " speaker");
  }
  if (max_rounds < 2) Fail(ErrorKind::kArgument, "max_rounds must be >= 2");
}

int Background::ValueOf(std::span<const int> allocation) const {
  int v = 0;
  for (size_t i = 0; i < allocation.size() && i < valuations.size(); ++i) {
    v += allocation[i] * valuations[i];
  }
  return v;
}

int History::OwnRound() const {
  int n = 0;
  for (const Turn& t : turns) n += (t.speaker == self());
  return n;
}

Scores::Scores(int goal, int relationship)
    : goal_(goal), relationship_(relationship) {
  if (goal < kMinGoal || goal > kMaxGoal) {
    Fail(ErrorKind::kRange, "goal " + std::to_string(goal) + " outside [0, 10]");
  }
  if (relationship < kMinRelationship || relationship > kMaxRelationship) {
    Fail(ErrorKind::kRange, "relationship " + std::to_string(relationship) +
                                " outside [-5, 5]");
  }
}

void Session::Validate() const {
  for (Role r : {Role::kFirst, Role::kSecond}) {
    const Background& b = background(r);
    b.Validate();
    if (b.role != r) Fail(ErrorKind::kArgument, "background role mismatch");
    if (b.pool != backgrounds[0].pool || b.max_rounds != backgrounds[0].max_rounds ||
        b.scenario_id != backgrounds[0].scenario_id) {
      Fail(ErrorKind::kArgument, "backgrounds describe different scenarios");
    }
  }
  if (horizon < 1 || horizon > 2 * max_rounds()) {
    Fail(ErrorKind::kArgument, "horizon outside [1, 2 * max_rounds]");
  }
  if (static_cast<int>(turns.size()) > horizon) {
    Fail(ErrorKind::kArgument, "transcript longer than its horizon");
  }
  for (size_t i = 0; i < turns.size(); ++i) {
    const Turn& t = turns[i];
    if (t.index != static_cast<int>(i)) {
      Fail(ErrorKind::kArgument, "turn index mismatch at " + std::to_string(i));
    }
    Role expected = (i % 2 == 0) ? Role::kFirst : Role::kSecond;
    if (t.speaker != expected) {
      Fail(ErrorKind::kArgument, "speakers do not alternate at turn " +
                                     std::to_string(i));
    }
  }
  if (deal.has_value()) {
    const std::vector<int>& pool = backgrounds[0].pool;
    if (deal->size() != pool.size()) {
      Fail(ErrorKind::kArgument, "deal has the wrong number of items");
    }
    for (size_t i = 0; i < pool.size(); ++i) {
      if ((*deal)[i] < 0 || (*deal)[i] > pool[i]) {
        Fail(ErrorKind::kArgument, "deal is infeasible for the pool");
      }
    }
  }
}

int AgentRoundCount(const Session& session, Role perspective) {
  int n = static_cast<int>(session.turns.size());
  return perspective == Role::kFirst ? (n + 1) / 2 : n / 2;
}

History HistoryAt(const Session& session, int agent_round, Role perspective) {
  const int len = HistoryLength(agent_round, perspective);
  if (agent_round < 0 || len > static_cast<int>(session.turns.size())) {
    Fail(ErrorKind::kRange,
         "agent round " + std::to_string(agent_round) + " of the " +
             RoleName(perspective) + " speaker is outside a transcript of " +
             std::to_string(session.turns.size()) + " turns");
  }
  History h;
  h.background = session.background(perspective);
  h.turns.assign(session.turns.begin(), session.turns.begin() + len);
  return h;
}

Segment::Segment(std::shared_ptr<const Session> session, Role perspective,
                 int start, int length, std::vector<SegmentStep> steps)
    : session_(std::move(session)),
      perspective_(perspective),
      start_(start),
      length_(length),
      steps_(std::move(steps)) {}

Segment ExtractSegment(std::shared_ptr<const Session> session, int start,
                       int length, Role perspective) {
  if (!session) Fail(ErrorKind::kArgument, "null session");
  if (length < 1) {
    Fail(ErrorKind::kArgument, "segment length must be positive");
  }
  if (start < 0) Fail(ErrorKind::kArgument, "negative segment start");
  const int rounds = AgentRoundCount(*session, perspective);
  if (start + length > rounds) {
    Fail(ErrorKind::kRange, "segment [" + std::to_string(start) + ", " +
                                std::to_string(start + length) +
                                ") exceeds " + std::to_string(rounds) +
                                " agent rounds");
  }
  std::vector<SegmentStep> steps;
  steps.reserve(length);
  for (int t = start; t < start + length; ++t) {
    History h = HistoryAt(*session, t, perspective);
    DialogueAct y = session->turns[h.turns.size()].act;
    steps.push_back(SegmentStep{std::move(h), std::move(y)});
  }
  return Segment(std::move(session), perspective, start, length, std::move(steps));
}

Segment WholeSession(std::shared_ptr<const Session> session, Role perspective) {
  const int rounds = AgentRoundCount(*session, perspective);
  if (rounds == 0) {
    Fail(ErrorKind::kArgument, "session has no outputs for the " +
                                   std::string(RoleName(perspective)) + " speaker");
  }
  return ExtractSegment(std::move(session), 0, rounds, perspective);
}

const char* ProvenanceName(Provenance p) {
  return p == Provenance::kSelfChat ? "self_chat" : "cross_play";
}

Provenance ProvenanceFromName(std::string_view name) {
  if (name == "self_chat") return Provenance::kSelfChat;
  if (name == "cross_play") return Provenance::kCrossPlay;
  Fail(ErrorKind::kParse, "unknown provenance '" + std::string(name) + "'");
}

int SharedPrefixLength(const Session& a, const Session& b) {
  size_t n = std::min(a.turns.size(), b.turns.size());
  size_t i = 0;
  while (i < n && a.turns[i] == b.turns[i]) ++i;
  return static_cast<int>(i);
}

PreferencePair::PreferencePair(Segment positive, Segment negative,
                               Provenance provenance, bool allow_unequal_lengths)
    : positive_(std::move(positive)),
      negative_(std::move(negative)),
      provenance_(provenance),
      shared_prefix_len_(0) {
  if (positive_.perspective() != negative_.perspective()) {
    Fail(ErrorKind::kArgument, "segments are taken from different perspectives");
  }
  if (positive_.start() != negative_.start()) {
    Fail(ErrorKind::kArgument, "segments start at different agent rounds (" +
                                   std::to_string(positive_.start()) + " vs " +
                                   std::to_string(negative_.start()) + ")");
  }
  if (!allow_unequal_lengths && positive_.length() != negative_.length()) {
    Fail(ErrorKind::kArgument, "segments have unequal agent-round counts (" +
                                   std::to_string(positive_.length()) + " vs " +
                                   std::to_string(negative_.length()) + ")");
  }
  const Session& pos = positive_.session();
  const Session& neg = negative_.session();
  if (pos.backgrounds != neg.backgrounds) {
    Fail(ErrorKind::kArgument, "sessions come from different scenarios");
  }
  shared_prefix_len_ = SharedPrefixLength(pos, neg);
  if (shared_prefix_len_ < HistoryLength(start(), perspective())) {
    Fail(ErrorKind::kArgument,
         "transcripts diverge before agent round " + std::to_string(start()));
  }
}

SessionPair::SessionPair(std::shared_ptr<const Session> positive,
                         std::shared_ptr<const Session> negative, Role perspective,
                         Provenance provenance)
    : positive_(WholeSession(std::move(positive), perspective)),
      negative_(WholeSession(std::move(negative), perspective)),
      provenance_(provenance) {
  if (positive_.session().backgrounds != negative_.session().backgrounds) {
    Fail(ErrorKind::kArgument, "sessions come from different scenarios");
  }
}

PreferencePair ReshapePair(const PreferencePair& pair, int negative_length,
                           int positive_length) {
  const int e = pair.start();
  const Role who = pair.perspective();
  const int pos_avail = AgentRoundCount(pair.positive().session(), who) - e;
  const int neg_avail = AgentRoundCount(pair.negative().session(), who) - e;
  int lp = positive_length;
  int ln = negative_length;
  if (lp == ln) {
    lp = ln = std::min({lp, pos_avail, neg_avail});
  } else {
    lp = std::min(lp, pos_avail);
    ln = std::min(ln, neg_avail);
  }
  return PreferencePair(ExtractSegment(pair.positive().session_ptr(), e, lp, who),
                        ExtractSegment(pair.negative().session_ptr(), e, ln, who),
                        pair.provenance(), /*allow_unequal_lengths=*/lp != ln);
}

}  // namespace segdpo
