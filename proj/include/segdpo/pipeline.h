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

#ifndef SEGDPO_PIPELINE_H_
#define SEGDPO_PIPELINE_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "segdpo/core_types.h"
#include "segdpo/negotiation.h"
#include "segdpo/policy.h"

namespace segdpo {

enum class JudgeKind { kProgrammatic, kRemote };
const char* JudgeKindName(JudgeKind kind);
JudgeKind JudgeKindFromName(std::string_view name);

struct RemoteJudgeConfig {
  // Full URL of a chat-completion endpoint, e.g.
  // http://localhost:8000/v1/chat/completions.
  std::string endpoint;
  std::string model;
  // Name of the environment variable holding the bearer token.
  std::string token_env = "SEGDPO_JUDGE_TOKEN";
  int max_attempts = 3;
  double backoff_seconds = 0.5;  // doubled after every failed attempt
  double timeout_seconds = 60.0;
  int max_concurrency = 4;
  // Use the programmatic judge when the endpoint keeps failing.
  bool fallback_to_programmatic = false;
};

struct PipelineConfig {
  // Sessions whose agent goal is strictly below this become negatives.
  int goal_threshold = 7;
  int n_samples = 5;
  double sample_temperature_agent = 1.0;
  double sample_temperature_partner = 0.7;
  // Agent temperature while collecting candidate negatives.
  double collect_temperature = 0.7;
  JudgeKind judge = JudgeKind::kProgrammatic;
  int rollouts_per_turn = 8;
  int criticality_margin = 1;
  // Segment length when the positive session ends without a deal.
  int fallback_length = 3;
  std::vector<std::string> partners = {"self", "cooperative", "stubborn", "tempered:0.7"};
  uint64_t seed = 0;
  int jobs = 1;
  RemoteJudgeConfig remote;

  // Throws kConfig.
  void Validate() const;
};

nlohmann::json ToJson(const PipelineConfig& cfg);
// Missing keys keep their defaults; unknown keys are a kConfig error.
PipelineConfig PipelineConfigFromJson(const nlohmann::json& j);

Provenance ProvenanceOf(const Session& session);

// Self-chat and cross-play sessions of the policy over every scenario, both
// seats and every configured partner, kept when the agent's goal is below
// the threshold. Order: scenario, seat, partner.
std::vector<Session> CollectNegatives(std::shared_ptr<const Policy> policy,
                                      std::span<const Scenario> scenarios,
                                      const PipelineConfig& cfg);

// Continuations of the negative's transcript before agent round e, with the
// agent and the original partner at the sampling temperatures.
std::vector<Session> SamplePrefixRollouts(const Session& negative, int agent_round,
                                          int count, std::shared_ptr<const Policy> policy,
                                          const PipelineConfig& cfg, uint64_t seed);

// Fresh sessions on the negative's scenario, seat and partner.
std::vector<Session> SampleFromScratch(const Session& negative, int count,
                                       std::shared_ptr<const Policy> policy,
                                       const PipelineConfig& cfg, uint64_t seed);

// Index of the best sample for the party: goal, then relationship, then the
// lowest index. Throws kArgument on an empty list.
size_t BestSample(std::span<const Session> samples, Role perspective);

// True when pos beats neg on goal or on relationship.
bool PassesGate(const Scores& pos, const Scores& neg);

// Earliest agent round whose mean rollout goal beats the session's goal by at
// least the margin. None when the session already scores 10 or no round
// qualifies.
std::optional<int> LocateErrorProgrammatic(const Session& negative,
                                           std::shared_ptr<const Policy> policy,
                                           const PipelineConfig& cfg, uint64_t seed);

// Best of n_samples prefix-conditioned rollouts from round e, or none when it
// fails the gate.
std::optional<Session> SamplePositive(const Session& negative, int agent_round,
                                      std::shared_ptr<const Policy> policy,
                                      const PipelineConfig& cfg, uint64_t seed);

// Agent round that settled the deal: the round of the agent's last offer
// before the partner accepted, or the agent's own Accept. None without a deal.
std::optional<int> DecisiveRound(const Session& session, Role perspective);

// Round at which the pair's segments start: the first agent round at or after
// e whose output differs between the two sessions. When the partner's reply
// diverges first, the agent round just before the divergence is used, so the
// transcripts still agree on everything before the anchor.
int AnchorRound(const Session& positive, const Session& negative, int e);

// Rounds from e through the decisive round (at least 1), or the fallback when
// there is no deal; capped by the rounds both sessions have from e on.
int SelectSegmentProgrammatic(const Session& positive, const Session& negative,
                              int agent_round, int fallback_length = 3);

class Judge {
 public:
  virtual ~Judge() = default;
  virtual std::optional<int> LocateError(const Session& negative, uint64_t seed) = 0;
  virtual int SelectSegment(const Session& positive, const Session& negative,
                            int agent_round) = 0;
  // Fails early (before any sampling) when the judge cannot work.
  virtual void CheckReady() const {}
  virtual std::string name() const = 0;
};

class ProgrammaticJudge : public Judge {
 public:
  ProgrammaticJudge(std::shared_ptr<const Policy> policy, PipelineConfig cfg)
      : policy_(std::move(policy)), cfg_(std::move(cfg)) {}

  std::optional<int> LocateError(const Session& negative, uint64_t seed) override;
  int SelectSegment(const Session& positive, const Session& negative,
                    int agent_round) override;
  std::string name() const override { return "programmatic"; }

 private:
  std::shared_ptr<const Policy> policy_;
  PipelineConfig cfg_;
};

struct PipelineStats {
  int negatives = 0;
  int paired = 0;
  int no_error = 0;      // locate returned none
  int discarded = 0;     // positive failed the gate
  int judge_failures = 0;
  std::map<int, int> e_histogram;
  std::map<int, int> length_histogram;             // agent rounds L
  std::map<int, int> transcript_length_histogram;  // turns spanned, 2L - 1
  std::map<int, int> truncated_histogram;  // positive rounds after the segment

  double gate_pass_rate() const;
  nlohmann::json ToJson() const;
};

struct PairBuildResult {
  std::vector<PreferencePair> pairs;
  PipelineStats stats;
};

// Locate, sample, select and cut one equal-length pair per surviving
// negative. Judge failures skip the item.
PairBuildResult BuildPairs(std::span<const Session> negatives,
                           std::shared_ptr<const Policy> policy, Judge& judge,
                           const PipelineConfig& cfg);

struct SessionPairBuildResult {
  std::vector<SessionPair> pairs;
  PipelineStats stats;
};

// Whole-session pairs: best of n_samples fresh sessions per negative.
SessionPairBuildResult BuildSessionPairs(std::span<const Session> negatives,
                                         std::shared_ptr<const Policy> policy,
                                         const PipelineConfig& cfg);

}  // namespace segdpo

#endif  // SEGDPO_PIPELINE_H_
