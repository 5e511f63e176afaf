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

#ifndef SEGDPO_TRAINER_H_
#define SEGDPO_TRAINER_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "segdpo/core_types.h"
#include "segdpo/losses.h"
#include "segdpo/policy.h"

namespace segdpo {

enum class Method { kBc, kPreferredSft, kDpo, kEto, kDmpo, kSdpo };
const char* MethodName(Method m);
// Accepts "preferred_sft" and "preferred-sft".
Method MethodFromName(std::string_view name);
bool IsPreferenceMethod(Method m);

enum class BcTurns { kAllParties, kAgentOnly };

struct TrainConfig {
  Method method = Method::kSdpo;
  int batch_size = 32;
  // 0 picks the method default (DefaultLearningRate).
  double learning_rate = 0.0;
  double warmup_fraction = 0.05;
  int epochs = 3;
  double beta = 0.1;
  double gamma = 0.99;
  double weight_decay = 0.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  // Stop once the epoch-mean loss changes by less than this, relatively.
  double plateau_tolerance = 1e-4;
  bool early_stop = true;
  // Which turns of the corpus the supervised methods imitate. Preferred-SFT
  // always uses the agent's turns of the positive sessions.
  BcTurns bc_turns = BcTurns::kAllParties;
  uint64_t seed = 0;
  int jobs = 1;
  // Stop after this many optimizer steps in total (0: no cap). Used to
  // split a run for checkpoint/resume.
  int64_t max_steps = 0;
  // Monitor gaps are recorded every this many steps (and on the last one).
  int trace_every = 1;

  double EffectiveLearningRate() const;
  LossConfig loss() const { return {beta, gamma}; }
  // Throws kConfig.
  void Validate() const;
};

double DefaultLearningRate(Method m);

nlohmann::json ToJson(const TrainConfig& cfg);
TrainConfig TrainConfigFromJson(const nlohmann::json& j);

struct TraceRecord {
  int64_t step = 0;
  std::string method;
  double loss = 0.0;
  double grad_norm = 0.0;
  // Mean over the monitor pairs of sum_t [log pi(y^w_t|h^w_t) - log pi(y^l_t|h^l_t)],
  // and of the same quantity restricted to the first round of the segment.
  double gap_segment = 0.0;
  double gap_first_turn = 0.0;
};

void WriteTraceCsv(const std::string& path, std::span<const TraceRecord> trace,
                   bool append = false);
std::vector<TraceRecord> ReadTraceCsv(const std::string& path);

struct SegmentGaps {
  double segment = 0.0;
  double first_turn = 0.0;
};
SegmentGaps MeasureGaps(const Policy& policy, std::span<const PreferencePair> pairs);

// Everything needed to continue a run bit-for-bit.
struct TrainState {
  Policy policy;
  int64_t step = 0;
  std::vector<double> adam_m;
  std::vector<double> adam_v;
  double epoch_loss_sum = 0.0;
  std::optional<double> previous_epoch_loss;
  bool finished = false;

  explicit TrainState(Policy p);
};

nlohmann::json CheckpointToJson(const TrainState& state, const TrainConfig& cfg);
TrainState CheckpointFromJson(const nlohmann::json& j);
void SaveCheckpoint(const std::string& path, const TrainState& state, const TrainConfig& cfg);
TrainState LoadCheckpoint(const std::string& path);

struct TrainData {
  std::vector<Session> sessions;              // bc
  std::vector<PreferencePair> segment_pairs;  // preferred_sft, dpo, sdpo
  std::vector<SessionPair> session_pairs;     // eto, dmpo
  std::vector<PreferencePair> monitor_pairs;  // gap measurement only
};

struct TrainResult {
  TrainState state;
  std::vector<TraceRecord> trace;
  int epochs_completed = 0;
  bool early_stopped = false;
};

// One supervised example: a history and the act taken there.
struct BcExample {
  History history;
  DialogueAct action;
};
std::vector<BcExample> BcExamples(std::span<const Session> sessions, BcTurns turns);

// Runs cfg.method from init (or from resume). Preference methods need ref.
// Throws kArgument when the data does not fit the method, kNumeric when the
// loss or gradient stops being finite or the loss passes 1e6, and kState if
// the reference changes.
TrainResult Train(const TrainConfig& cfg, const TrainData& data, const Policy& init,
                  const ReferencePolicy* ref, const TrainState* resume = nullptr);

// Mean loss of the method over a batch of items at the given parameters.
double BatchLoss(const TrainConfig& cfg, const TrainData& data, const Policy& policy,
                 const ReferencePolicy* ref, std::span<const size_t> items);

}  // namespace segdpo

#endif  // SEGDPO_TRAINER_H_
