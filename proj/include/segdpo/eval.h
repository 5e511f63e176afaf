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

#ifndef SEGDPO_EVAL_H_
#define SEGDPO_EVAL_H_

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "segdpo/negotiation.h"
#include "segdpo/pipeline.h"
#include "segdpo/policy.h"
#include "segdpo/trainer.h"

namespace segdpo {

struct EvalConfig {
  std::vector<std::string> partners = {"self", "cooperative", "stubborn", "tempered:0.7"};
  int n_scenarios = 200;
  double temperature = 0.7;
  // Stop every session after this many agent outputs (0: no cap).
  int truncate_agent_rounds = 0;
  double hard_quartile = 0.25;
  // Seeds the scenario set and every session's stream.
  uint64_t seed = 0;
  int jobs = 1;

  // Throws kConfig.
  void Validate() const;
};

nlohmann::json ToJson(const EvalConfig& cfg);
EvalConfig EvalConfigFromJson(const nlohmann::json& j);

// Evaluation scenarios; identical for every method evaluated with the same
// seed and count.
std::vector<Scenario> EvalScenarios(const EvalConfig& cfg);

struct SessionOutcome {
  int scenario_index = 0;
  std::string scenario_id;
  Role role = Role::kFirst;
  std::string partner;
  int goal = 0;
  int relationship = 0;
  int agent_rounds = 0;
  int turns = 0;
  bool deal = false;
  bool hard = false;
};

struct PartnerSummary {
  std::string partner;
  int sessions = 0;
  double goal = 0.0;
  double relationship = 0.0;
  double hard_goal = 0.0;
  double hard_relationship = 0.0;
};

struct EvalReport {
  std::string label;
  uint64_t seed = 0;
  std::vector<std::string> scenario_ids;
  std::vector<PartnerSummary> partners;
  double avg = 0.0;  // mean of the per-partner goal and relationship cells
  double goal = 0.0;  // over all sessions
  double relationship = 0.0;
  double hard_goal = 0.0;
  double hard_relationship = 0.0;
  double mean_agent_rounds = 0.0;
  double mean_turns = 0.0;
  std::vector<SessionOutcome> sessions;

  nlohmann::json ToJson() const;
  static EvalReport FromJson(const nlohmann::json& j);
  std::string ToCsv() const;
};

// Plays every scenario from both seats against every partner. Sessions come
// out in (scenario, seat, partner) order.
EvalReport Evaluate(const Actor& agent, std::shared_ptr<const Policy> self_policy,
                    std::span<const Scenario> scenarios, const EvalConfig& cfg,
                    const std::string& label,
                    const std::map<std::string, std::shared_ptr<const Policy>>* named = nullptr);

EvalReport EvaluatePolicy(std::shared_ptr<const Policy> policy, const EvalConfig& cfg,
                          const std::string& label);

struct Interval {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Percentile bootstrap of the mean of the given unit values.
Interval BootstrapMean(std::span<const double> values, int resamples, uint64_t seed,
                       double level = 0.95);

struct MethodRow {
  std::string label;
  int reports = 0;
  Interval goal;
  Interval relationship;
  double avg = 0.0;
  double hard_goal = 0.0;
  int rank = 0;  // by mean goal, 1 is best
};

struct PairwiseRow {
  std::string a;
  std::string b;
  Interval goal_difference;  // a - b, bootstrapped over scenarios
  double win_rate = 0.0;     // over matched sessions, ties count half
};

struct Comparison {
  std::vector<MethodRow> methods;
  std::vector<PairwiseRow> pairwise;

  // Row for a versus b, flipped if stored the other way round. Throws kArgument.
  PairwiseRow Pair(const std::string& a, const std::string& b) const;
  const MethodRow& Method(const std::string& label) const;
  nlohmann::json ToJson() const;
  std::string ToCsv() const;
};

// Reports sharing a label (e.g. several training seeds) are pooled. All
// reports must come from the same evaluation seed, scenarios and partners;
// otherwise kArgument.
Comparison CompareMethods(std::span<const EvalReport> reports, int resamples = 1000,
                          uint64_t seed = 0);

struct QualityRow {
  std::string mode;  // "segment" or "from_scratch"
  int count = 0;
  double goal = 0.0;
  double relationship = 0.0;
  int negatives = 0;
};

// Mean scores of the best of the first k samples, k = 1..max_count, for
// prefix-conditioned sampling at the located error and for sampling from
// scratch, over the negatives where an error was located.
std::vector<QualityRow> PositiveQualityComparison(std::span<const Session> negatives,
                                                  std::shared_ptr<const Policy> policy,
                                                  const PipelineConfig& cfg, int max_count);

// Aligns traces on the first trace's measured steps that every trace covers,
// interpolating the others linearly. Columns: step, then <label>_gap_segment
// and <label>_gap_first_turn per trace.
std::string GapCurvesCsv(const std::vector<std::string>& labels,
                         const std::vector<std::vector<TraceRecord>>& traces);

}  // namespace segdpo

#endif  // SEGDPO_EVAL_H_
