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

#include "segdpo/policy.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "segdpo/error.h"
#include "segdpo/serialization.h"

namespace segdpo {

namespace {

constexpr int kCheckpointFormat = 1;

double Dot(std::span<const double> a, const double* b, size_t n) {
  double s = 0.0;
  for (size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

Policy::Policy(double temperature) : Policy(std::vector<double>(dim(), 0.0), temperature) {}

Policy::Policy(std::vector<double> theta, double temperature)
    : theta_(std::move(theta)), temperature_(temperature) {
  if (static_cast<int>(theta_.size()) != dim()) {
    Fail(ErrorKind::kArgument, "theta has " + std::to_string(theta_.size()) +
                                   " entries, expected " + std::to_string(dim()));
  }
  if (!(temperature_ > 0.0) || !std::isfinite(temperature_)) {
    Fail(ErrorKind::kArgument, "policy temperature must be positive");
  }
}

void Policy::CheckFinite() const {
  for (size_t i = 0; i < theta_.size(); ++i) {
    if (!std::isfinite(theta_[i])) {
      Fail(ErrorKind::kNumeric, "theta[" + std::to_string(i) + "] is not finite");
    }
  }
}

uint64_t Fingerprint(const Policy& policy) {
  // FNV-1a over the raw parameter bytes.
  uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  const double t = policy.temperature();
  mix(&t, sizeof(t));
  mix(policy.theta().data(), policy.theta().size() * sizeof(double));
  return h;
}

ReferencePolicy::ReferencePolicy(Policy policy)
    : policy_(std::move(policy)), fingerprint_(Fingerprint(policy_)) {}

bool ReferencePolicy::Intact() const { return Fingerprint(policy_) == fingerprint_; }

int ActDistribution::IndexOf(const DialogueAct& act) const {
  for (size_t i = 0; i < acts.size(); ++i) {
    if (acts[i] == act) return static_cast<int>(i);
  }
  return -1;
}

namespace {

// Raw logits theta.f / temperature for every act of d.
void Logits(const Policy& policy, const ActDistribution& d, double temperature,
            std::vector<double>& out) {
  const auto theta = policy.theta();
  std::array<double, kNumActKinds> block{};
  for (int k = 0; k < kNumActKinds; ++k) {
    block[k] = Dot(d.summary.context,
                   theta.data() + FeatureMap::BlockOffset(static_cast<ActKind>(k)),
                   FeatureMap::kContextDim);
  }
  const double* offer_theta = theta.data() + FeatureMap::OfferOffset();
  out.resize(d.acts.size());
  for (size_t i = 0; i < d.acts.size(); ++i) {
    double logit = block[static_cast<int>(d.acts[i].kind)];
    if (i < d.offer_features.size()) {
      logit += Dot(d.offer_features[i], offer_theta, FeatureMap::kOfferDim);
    }
    out[i] = logit / temperature;
  }
}

double LogSumExp(std::span<const double> x) {
  const double mx = *std::max_element(x.begin(), x.end());
  double z = 0.0;
  for (double l : x) z += std::exp(l - mx);
  return mx + std::log(z);
}

}  // namespace

ActDistribution Distribution(const Policy& policy, const History& history,
                             double extra_temperature) {
  ActDistribution d;
  d.temperature = policy.temperature() * extra_temperature;
  d.acts = EnumerateActions(history);
  d.summary = FeatureMap::Summarize(history);
  for (const DialogueAct& a : d.acts) {
    if (a.kind != ActKind::kOffer) break;
    d.offer_features.push_back(FeatureMap::Offer(history, d.summary, a.claim));
  }
  Logits(policy, d, d.temperature, d.logprobs);
  const double lse = LogSumExp(d.logprobs);
  d.probs.resize(d.acts.size());
  for (size_t i = 0; i < d.acts.size(); ++i) {
    d.logprobs[i] -= lse;
    d.probs[i] = std::exp(d.logprobs[i]);
  }
  return d;
}

double LogProbAt(const Policy& policy, const ActDistribution& d, int index) {
  std::vector<double> logits;
  Logits(policy, d, policy.temperature(), logits);
  return logits[index] - LogSumExp(logits);
}

void AccumulateGradLogProb(const ActDistribution& d, int index, double scale,
                           std::span<double> grad) {
  const double s = scale / d.temperature;
  std::array<double, kNumActKinds> weight{};
  std::array<double, FeatureMap::kOfferDim> offer{};
  size_t offer_i = 0;
  for (size_t i = 0; i < d.acts.size(); ++i) {
    const double p = d.probs[i];
    weight[static_cast<int>(d.acts[i].kind)] -= p;
    if (d.acts[i].kind == ActKind::kOffer) {
      const auto& g = d.offer_features[offer_i++];
      for (int j = 0; j < FeatureMap::kOfferDim; ++j) offer[j] -= p * g[j];
    }
  }
  const DialogueAct& chosen = d.acts[index];
  weight[static_cast<int>(chosen.kind)] += 1.0;
  if (chosen.kind == ActKind::kOffer) {
    const auto& g = d.offer_features[index];
    for (int j = 0; j < FeatureMap::kOfferDim; ++j) offer[j] += g[j];
  }
  const auto& c = d.summary.context;
  for (int k = 0; k < kNumActKinds; ++k) {
    if (weight[k] == 0.0) continue;
    double* out = grad.data() + FeatureMap::BlockOffset(static_cast<ActKind>(k));
    const double w = s * weight[k];
    for (int j = 0; j < FeatureMap::kContextDim; ++j) out[j] += w * c[j];
  }
  double* out = grad.data() + FeatureMap::OfferOffset();
  for (int j = 0; j < FeatureMap::kOfferDim; ++j) out[j] += s * offer[j];
}

namespace {

int RequireLegal(const ActDistribution& d, const DialogueAct& act) {
  const int i = d.IndexOf(act);
  if (i < 0) Fail(ErrorKind::kArgument, "act " + act.ToString() + " is not legal here");
  return i;
}

}  // namespace

double LogProb(const Policy& policy, const History& history, const DialogueAct& act) {
  const ActDistribution d = Distribution(policy, history);
  return d.logprobs[RequireLegal(d, act)];
}

std::vector<double> GradLogProb(const Policy& policy, const History& history,
                                const DialogueAct& act) {
  const ActDistribution d = Distribution(policy, history);
  std::vector<double> g(Policy::dim(), 0.0);
  AccumulateGradLogProb(d, RequireLegal(d, act), 1.0, g);
  return g;
}

DialogueAct Sample(const Policy& policy, const History& history, Rng& rng,
                   const SampleOptions& options) {
  if (options.greedy) {
    const ActDistribution d = Distribution(policy, history);
    const auto it = std::max_element(d.logprobs.begin(), d.logprobs.end());
    return d.acts[it - d.logprobs.begin()];
  }
  ActDistribution d = Distribution(policy, history, options.temperature);
  return std::move(d.acts[rng.Categorical(d.probs)]);
}

Actor Actor::FromPolicy(std::shared_ptr<const Policy> policy, SampleOptions options,
                        std::string name) {
  return Actor(PolicyActor{std::move(policy), options}, std::move(name));
}

Actor Actor::FromPersona(Persona persona) {
  std::string name = persona.Name();
  return Actor(persona, std::move(name));
}

Actor Actor::Expert() { return Actor(ExpertActor{}, "expert"); }
Actor Actor::Random() { return Actor(RandomActor{}, "random"); }

DialogueAct Actor::Act(const History& history, Rng& rng) const {
  struct Visitor {
    const History& h;
    Rng& rng;
    DialogueAct operator()(const PolicyActor& a) const {
      return Sample(*a.policy, h, rng, a.options);
    }
    DialogueAct operator()(const Persona& p) const { return PersonaAct(p, h, rng); }
    DialogueAct operator()(const ExpertActor&) const { return ExpertAct(h); }
    DialogueAct operator()(const RandomActor&) const {
      std::vector<DialogueAct> acts = EnumerateActions(h);
      return std::move(acts[rng.UniformInt(acts.size())]);
    }
  };
  return std::visit(Visitor{history, rng}, impl_);
}

Actor MakePartner(const std::string& descriptor, std::shared_ptr<const Policy> self,
                  double temperature,
                  const std::map<std::string, std::shared_ptr<const Policy>>* named) {
  if (descriptor == "self") {
    if (!self) Fail(ErrorKind::kConfig, "partner 'self' needs a policy");
    return Actor::FromPolicy(std::move(self), {temperature, false}, "self");
  }
  if (descriptor == "expert") return Actor::Expert();
  if (descriptor == "random") return Actor::Random();
  constexpr std::string_view kPolicyPrefix = "policy:";
  if (descriptor.rfind(kPolicyPrefix, 0) == 0) {
    const std::string name = descriptor.substr(kPolicyPrefix.size());
    if (named == nullptr || named->find(name) == named->end()) {
      Fail(ErrorKind::kConfig, "no policy registered as '" + name + "'");
    }
    return Actor::FromPolicy(named->at(name), {temperature, false}, descriptor);
  }
  return Actor::FromPersona(Persona::Parse(descriptor));
}

int TruncatedHorizon(int agent_rounds, Role agent_role, int max_rounds) {
  const int h = 2 * agent_rounds + (agent_role == Role::kSecond ? 1 : 0);
  return std::min(h, 2 * max_rounds);
}

Session Rollout(const Scenario& scenario, Role agent_role, const Actor& agent,
                const Actor& partner, Rng& rng, const RolloutOptions& options) {
  int horizon = options.horizon;
  if (horizon == 0 && options.truncate_agent_rounds > 0) {
    horizon = TruncatedHorizon(options.truncate_agent_rounds, agent_role,
                               scenario.max_rounds);
  }
  Dialogue dialogue(scenario, agent_role,
                    options.partner_name.empty() ? partner.name() : options.partner_name,
                    horizon);
  for (size_t i = 0; i < options.prefix.size(); ++i) {
    const Turn& t = options.prefix[i];
    if (t.index != static_cast<int>(i) || t.speaker != dialogue.ToMove() ||
        dialogue.IsTerminal()) {
      Fail(ErrorKind::kArgument, "prefix turn " + std::to_string(i) + " is out of place");
    }
    try {
      dialogue.Apply(t.act);
    } catch (const Error& e) {
      Fail(ErrorKind::kArgument, std::string("invalid prefix: ") + e.what());
    }
  }
  while (!dialogue.IsTerminal()) {
    const Role who = dialogue.ToMove();
    const Actor& actor = who == agent_role ? agent : partner;
    dialogue.Apply(actor.Act(dialogue.HistoryFor(who), rng));
  }
  return dialogue.ToSession();
}

nlohmann::json PolicyToJson(const Policy& policy) {
  nlohmann::json j;
  j["format_version"] = kCheckpointFormat;
  j["feature_map_version"] = FeatureMap::kVersion;
  j["dim"] = Policy::dim();
  j["temperature"] = policy.temperature();
  j["theta"] = std::vector<double>(policy.theta().begin(), policy.theta().end());
  return j;
}

Policy PolicyFromJson(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != kCheckpointFormat) {
      Fail(ErrorKind::kLoad, "unsupported checkpoint format_version");
    }
    const std::string fm = j.at("feature_map_version").get<std::string>();
    if (fm != FeatureMap::kVersion) {
      Fail(ErrorKind::kLoad, "checkpoint was written for feature map '" + fm +
                                 "', this build uses '" + FeatureMap::kVersion + "'");
    }
    std::vector<double> theta = j.at("theta").get<std::vector<double>>();
    if (static_cast<int>(theta.size()) != Policy::dim()) {
      Fail(ErrorKind::kLoad, "checkpoint theta has the wrong dimension");
    }
    Policy p(std::move(theta), j.at("temperature").get<double>());
    p.CheckFinite();
    return p;
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kLoad, std::string("malformed checkpoint: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kLoad) throw;
    Fail(ErrorKind::kLoad, std::string("invalid checkpoint: ") + e.what());
  }
}

void SavePolicy(const std::string& path, const Policy& policy) {
  WriteTextFile(path, PolicyToJson(policy).dump() + "\n");
}

Policy LoadPolicy(const std::string& path) {
  const std::string text = ReadTextFile(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kLoad, path + ": " + e.what());
  }
  return PolicyFromJson(j);
}

}  // namespace segdpo
