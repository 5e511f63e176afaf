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

#ifndef SEGDPO_POLICY_H_
#define SEGDPO_POLICY_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "segdpo/core_types.h"
#include "segdpo/feature_map.h"
#include "segdpo/negotiation.h"
#include "segdpo/rng.h"

namespace segdpo {

// Linear softmax policy: log pi(a|h) = theta.f(h,a)/T - logsumexp_b theta.f(h,b)/T
// over the legal acts b.
class Policy {
 public:
  explicit Policy(double temperature = 1.0);
  Policy(std::vector<double> theta, double temperature);

  std::span<const double> theta() const { return theta_; }
  std::vector<double>& mutable_theta() { return theta_; }
  double temperature() const { return temperature_; }
  static constexpr int dim() { return FeatureMap::kDim; }

  // Throws kNumeric if any parameter is not finite.
  void CheckFinite() const;

  bool operator==(const Policy&) const = default;

 private:
  std::vector<double> theta_;
  double temperature_;
};

// Frozen snapshot of a policy. The fingerprint is taken at construction and
// can be re-checked to prove the parameters never changed.
class ReferencePolicy {
 public:
  explicit ReferencePolicy(Policy policy);

  const Policy& policy() const { return policy_; }
  uint64_t fingerprint() const { return fingerprint_; }
  bool Intact() const;

 private:
  const Policy policy_;
  const uint64_t fingerprint_;
};

uint64_t Fingerprint(const Policy& policy);

// Softmax over the legal acts of one history, with what is needed to form
// gradients without recomputing features.
struct ActDistribution {
  std::vector<DialogueAct> acts;
  std::vector<double> logprobs;
  std::vector<double> probs;
  FeatureMap::Summary summary;
  std::vector<FeatureMap::OfferFeatures> offer_features;  // one per leading offer act
  double temperature = 1.0;

  // Index of act in acts, or -1 when it is not legal here.
  int IndexOf(const DialogueAct& act) const;
};

// extra_temperature multiplies the policy temperature (sampling knob).
ActDistribution Distribution(const Policy& policy, const History& history,
                             double extra_temperature = 1.0);

// Throw kArgument when the act is illegal in the history.
double LogProb(const Policy& policy, const History& history, const DialogueAct& act);
std::vector<double> GradLogProb(const Policy& policy, const History& history,
                                const DialogueAct& act);

// log pi(acts[index]) under another policy, reusing the features of d.
double LogProbAt(const Policy& policy, const ActDistribution& d, int index);

// grad += scale * d log pi(acts[index]) / d theta.
void AccumulateGradLogProb(const ActDistribution& dist, int index, double scale,
                           std::span<double> grad);

struct SampleOptions {
  double temperature = 1.0;  // multiplies the policy temperature
  bool greedy = false;       // argmax, ties to the earliest act
};

DialogueAct Sample(const Policy& policy, const History& history, Rng& rng,
                   const SampleOptions& options = {});

// Something that can take a turn: a learned policy, a persona, the scripted
// expert or a uniformly random mover.
class Actor {
 public:
  static Actor FromPolicy(std::shared_ptr<const Policy> policy, SampleOptions options,
                          std::string name = "policy");
  static Actor FromPersona(Persona persona);
  static Actor Expert();
  static Actor Random();

  DialogueAct Act(const History& history, Rng& rng) const;
  const std::string& name() const { return name_; }

 private:
  struct PolicyActor {
    std::shared_ptr<const Policy> policy;
    SampleOptions options;
  };
  struct ExpertActor {};
  struct RandomActor {};
  using Impl = std::variant<PolicyActor, Persona, ExpertActor, RandomActor>;

  Actor(Impl impl, std::string name) : impl_(std::move(impl)), name_(std::move(name)) {}

  Impl impl_;
  std::string name_;
};

// Resolves a partner descriptor: "self" (the given policy), "expert",
// "random", "cooperative", "stubborn", "tempered:<t>" or "policy:<name>"
// (looked up in named). Learned partners sample at the given temperature.
// Throws kConfig for anything else.
Actor MakePartner(const std::string& descriptor, std::shared_ptr<const Policy> self,
                  double temperature,
                  const std::map<std::string, std::shared_ptr<const Policy>>* named = nullptr);

struct RolloutOptions {
  // Transcript to extend verbatim; must be a legal prefix.
  std::span<const Turn> prefix;
  // Cap on the agent's outputs; 0 means no cap beyond max_rounds.
  int truncate_agent_rounds = 0;
  // Explicit turn budget (0: derived from the cap or 2 * max_rounds).
  int horizon = 0;
  // Recorded in Session::partner; defaults to the partner actor's name.
  std::string partner_name;
};

// Turn budget that stops right after the agent's k-th output has been
// answered (first speaker) or made and answered (second speaker).
int TruncatedHorizon(int agent_rounds, Role agent_role, int max_rounds);

// Plays agent (in agent_role) against partner until the dialogue ends.
// Throws kArgument when the prefix is not a legal transcript.
Session Rollout(const Scenario& scenario, Role agent_role, const Actor& agent,
                const Actor& partner, Rng& rng, const RolloutOptions& options = {});

// Checkpoint I/O. Extra top-level fields (optimizer state, metadata) may be
// attached by the caller and are ignored here.
nlohmann::json PolicyToJson(const Policy& policy);
// Throws kLoad on a format or feature-map version mismatch.
Policy PolicyFromJson(const nlohmann::json& j);
void SavePolicy(const std::string& path, const Policy& policy);
Policy LoadPolicy(const std::string& path);

}  // namespace segdpo

#endif  // SEGDPO_POLICY_H_
