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

#include "segdpo/pipeline.h"

#include <algorithm>
#include <set>

#include "segdpo/error.h"
#include "segdpo/parallel.h"

namespace segdpo {

namespace {

constexpr uint64_t kCollectTag = 0xc011ec7;
constexpr uint64_t kPairTag = 0x9a125;
constexpr uint64_t kScratchTag = 0x5c7a7c4;

Actor AgentActor(std::shared_ptr<const Policy> policy, double temperature) {
  return Actor::FromPolicy(std::move(policy), {temperature, false}, "agent");
}

Session ContinueFrom(const Scenario& scenario, const Session& base, int prefix_turns,
                     const Actor& agent, const Actor& partner, uint64_t seed) {
  Rng rng(seed);
  RolloutOptions opt;
  opt.prefix = std::span<const Turn>(base.turns).first(prefix_turns);
  opt.horizon = base.horizon;
  opt.partner_name = base.partner;
  return Rollout(scenario, base.agent_role, agent, partner, rng, opt);
}

}  // namespace

const char* JudgeKindName(JudgeKind kind) {
  return kind == JudgeKind::kRemote ? "remote" : "programmatic";
}

JudgeKind JudgeKindFromName(std::string_view name) {
  if (name == "programmatic") return JudgeKind::kProgrammatic;
  if (name == "remote") return JudgeKind::kRemote;
  Fail(ErrorKind::kConfig, "judge must be 'programmatic' or 'remote'");
}

void PipelineConfig::Validate() const {
  if (goal_threshold < Scores::kMinGoal || goal_threshold > Scores::kMaxGoal + 1) {
    Fail(ErrorKind::kConfig, "goal_threshold outside the goal range");
  }
  if (n_samples < 1) Fail(ErrorKind::kConfig, "n_samples must be >= 1");
  if (rollouts_per_turn < 1) Fail(ErrorKind::kConfig, "rollouts_per_turn must be >= 1");
  if (criticality_margin < 0 || criticality_margin > Scores::kMaxGoal) {
    Fail(ErrorKind::kConfig, "criticality_margin outside [0, 10]");
  }
  if (fallback_length < 1) Fail(ErrorKind::kConfig, "fallback_length must be >= 1");
  for (double t : {sample_temperature_agent, sample_temperature_partner, collect_temperature}) {
    if (!(t > 0.0)) Fail(ErrorKind::kConfig, "temperatures must be positive");
  }
  if (partners.empty()) Fail(ErrorKind::kConfig, "at least one partner is required");
  for (const auto& p : partners) {
    if (p == "self" || p == "expert" || p == "random" || p.rfind("policy:", 0) == 0) continue;
    Persona::Parse(p);
  }
  if (jobs < 1) Fail(ErrorKind::kConfig, "jobs must be >= 1");
  if (judge == JudgeKind::kRemote) {
    if (remote.endpoint.empty()) Fail(ErrorKind::kConfig, "remote judge needs an endpoint");
    if (remote.model.empty()) Fail(ErrorKind::kConfig, "remote judge needs a model name");
    if (remote.max_attempts < 1 || remote.max_concurrency < 1) {
      Fail(ErrorKind::kConfig, "remote judge attempts and concurrency must be >= 1");
    }
  }
}

nlohmann::json ToJson(const PipelineConfig& c) {
  nlohmann::json j;
  j["goal_threshold"] = c.goal_threshold;
  j["n_samples"] = c.n_samples;
  j["sample_temperature_agent"] = c.sample_temperature_agent;
  j["sample_temperature_partner"] = c.sample_temperature_partner;
  j["collect_temperature"] = c.collect_temperature;
  j["judge"] = JudgeKindName(c.judge);
  j["rollouts_per_turn"] = c.rollouts_per_turn;
  j["criticality_margin"] = c.criticality_margin;
  j["fallback_length"] = c.fallback_length;
  j["partners"] = c.partners;
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  j["remote"] = {{"endpoint", c.remote.endpoint},
                 {"model", c.remote.model},
                 {"token_env", c.remote.token_env},
                 {"max_attempts", c.remote.max_attempts},
                 {"backoff_seconds", c.remote.backoff_seconds},
                 {"timeout_seconds", c.remote.timeout_seconds},
                 {"max_concurrency", c.remote.max_concurrency},
                 {"fallback_to_programmatic", c.remote.fallback_to_programmatic}};
  return j;
}

namespace {

template <typename T>
void Take(const nlohmann::json& j, const char* key, T& out, std::set<std::string>& seen) {
  seen.insert(key);
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    Fail(ErrorKind::kConfig, std::string("config field '") + key + "' has the wrong type");
  }
}

void RejectUnknown(const nlohmann::json& j, const std::set<std::string>& seen,
                   const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!seen.count(it.key())) {
      Fail(ErrorKind::kConfig, "unknown config field '" + where + it.key() + "'");
    }
  }
}

}  // namespace

PipelineConfig PipelineConfigFromJson(const nlohmann::json& j) {
  if (!j.is_object()) Fail(ErrorKind::kConfig, "pipeline config must be an object");
  PipelineConfig c;
  std::set<std::string> seen;
  Take(j, "goal_threshold", c.goal_threshold, seen);
  Take(j, "n_samples", c.n_samples, seen);
  Take(j, "sample_temperature_agent", c.sample_temperature_agent, seen);
  Take(j, "sample_temperature_partner", c.sample_temperature_partner, seen);
  Take(j, "collect_temperature", c.collect_temperature, seen);
  std::string judge = JudgeKindName(c.judge);
  Take(j, "judge", judge, seen);
  c.judge = JudgeKindFromName(judge);
  Take(j, "rollouts_per_turn", c.rollouts_per_turn, seen);
  Take(j, "criticality_margin", c.criticality_margin, seen);
  Take(j, "fallback_length", c.fallback_length, seen);
  Take(j, "partners", c.partners, seen);
  Take(j, "seed", c.seed, seen);
  Take(j, "jobs", c.jobs, seen);
  seen.insert("remote");
  if (j.contains("remote")) {
    const auto& r = j.at("remote");
    if (!r.is_object()) Fail(ErrorKind::kConfig, "'remote' must be an object");
    std::set<std::string> rs;
    Take(r, "endpoint", c.remote.endpoint, rs);
    Take(r, "model", c.remote.model, rs);
    Take(r, "token_env", c.remote.token_env, rs);
    Take(r, "max_attempts", c.remote.max_attempts, rs);
    Take(r, "backoff_seconds", c.remote.backoff_seconds, rs);
    Take(r, "timeout_seconds", c.remote.timeout_seconds, rs);
    Take(r, "max_concurrency", c.remote.max_concurrency, rs);
    Take(r, "fallback_to_programmatic", c.remote.fallback_to_programmatic, rs);
    RejectUnknown(r, rs, "remote.");
  }
  RejectUnknown(j, seen, "");
  c.Validate();
  return c;
}

Provenance ProvenanceOf(const Session& session) {
  return session.partner == "self" ? Provenance::kSelfChat : Provenance::kCrossPlay;
}

std::vector<Session> CollectNegatives(std::shared_ptr<const Policy> policy,
                                      std::span<const Scenario> scenarios,
                                      const PipelineConfig& cfg) {
  cfg.Validate();
  const size_t n_partners = cfg.partners.size();
  const size_t total = scenarios.size() * 2 * n_partners;
  std::vector<std::optional<Session>> slots(total);
  const Actor agent = AgentActor(policy, cfg.collect_temperature);
  std::vector<Actor> partners;
  for (const auto& p : cfg.partners) {
    partners.push_back(MakePartner(p, policy, cfg.sample_temperature_partner));
  }
  ParallelFor(total, cfg.jobs, [&](size_t k) {
    const size_t i = k / (2 * n_partners);
    const int seat = static_cast<int>((k / n_partners) % 2);
    const size_t p = k % n_partners;
    Rng rng(DeriveSeed(cfg.seed, {kCollectTag, i, static_cast<uint64_t>(seat), p}));
    RolloutOptions opt;
    opt.partner_name = cfg.partners[p];
    const Role role = seat == 0 ? Role::kFirst : Role::kSecond;
    Session s = Rollout(scenarios[i], role, agent, partners[p], rng, opt);
    if (s.score(role).goal() < cfg.goal_threshold) slots[k] = std::move(s);
  });
  std::vector<Session> out;
  for (auto& s : slots) {
    if (s) out.push_back(std::move(*s));
  }
  return out;
}

std::vector<Session> SamplePrefixRollouts(const Session& negative, int agent_round,
                                          int count, std::shared_ptr<const Policy> policy,
                                          const PipelineConfig& cfg, uint64_t seed) {
  const Scenario scenario = ScenarioFromSession(negative);
  const Actor agent = AgentActor(policy, cfg.sample_temperature_agent);
  const Actor partner = MakePartner(negative.partner, policy, cfg.sample_temperature_partner);
  const int prefix = HistoryLength(agent_round, negative.agent_role);
  if (prefix > static_cast<int>(negative.turns.size())) {
    Fail(ErrorKind::kRange, "agent round past the end of the session");
  }
  std::vector<Session> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    out.push_back(ContinueFrom(scenario, negative, prefix, agent, partner,
                               DeriveSeed(seed, {static_cast<uint64_t>(k)})));
  }
  return out;
}

std::vector<Session> SampleFromScratch(const Session& negative, int count,
                                       std::shared_ptr<const Policy> policy,
                                       const PipelineConfig& cfg, uint64_t seed) {
  return SamplePrefixRollouts(negative, 0, count, std::move(policy), cfg, seed);
}

size_t BestSample(std::span<const Session> samples, Role perspective) {
  if (samples.empty()) Fail(ErrorKind::kArgument, "no samples to choose from");
  size_t best = 0;
  for (size_t k = 1; k < samples.size(); ++k) {
    const Scores& a = samples[k].score(perspective);
    const Scores& b = samples[best].score(perspective);
    if (a.goal() > b.goal() ||
        (a.goal() == b.goal() && a.relationship() > b.relationship())) {
      best = k;
    }
  }
  return best;
}

bool PassesGate(const Scores& pos, const Scores& neg) {
  return pos.goal() > neg.goal() || pos.relationship() > neg.relationship();
}

std::optional<int> LocateErrorProgrammatic(const Session& negative,
                                           std::shared_ptr<const Policy> policy,
                                           const PipelineConfig& cfg, uint64_t seed) {
  const Role role = negative.agent_role;
  const int goal = negative.score(role).goal();
  if (goal >= Scores::kMaxGoal) return std::nullopt;
  const int rounds = AgentRoundCount(negative, role);
  for (int t = 0; t < rounds; ++t) {
    const auto samples = SamplePrefixRollouts(negative, t, cfg.rollouts_per_turn, policy,
                                              cfg, DeriveSeed(seed, {static_cast<uint64_t>(t)}));
    int sum = 0;
    for (const Session& s : samples) sum += s.score(role).goal();
    // mean >= goal + margin, kept in integers
    if (sum >= (goal + cfg.criticality_margin) * cfg.rollouts_per_turn) return t;
  }
  return std::nullopt;
}

std::optional<Session> SamplePositive(const Session& negative, int agent_round,
                                      std::shared_ptr<const Policy> policy,
                                      const PipelineConfig& cfg, uint64_t seed) {
  auto samples =
      SamplePrefixRollouts(negative, agent_round, cfg.n_samples, std::move(policy), cfg, seed);
  const size_t best = BestSample(samples, negative.agent_role);
  if (!PassesGate(samples[best].score(negative.agent_role),
                  negative.score(negative.agent_role))) {
    return std::nullopt;
  }
  return std::move(samples[best]);
}

std::optional<int> DecisiveRound(const Session& session, Role perspective) {
  if (!session.deal.has_value() || session.turns.empty()) return std::nullopt;
  const int accept = static_cast<int>(session.turns.size()) - 1;
  int decisive_turn = -1;
  if (session.turns[accept].speaker == perspective) {
    decisive_turn = accept;
  } else {
    for (int i = accept - 1; i >= 0; --i) {
      if (session.turns[i].speaker == perspective &&
          session.turns[i].act.kind == ActKind::kOffer) {
        decisive_turn = i;
        break;
      }
    }
  }
  if (decisive_turn < 0) return std::nullopt;
  int round = 0;
  for (int i = 0; i < decisive_turn; ++i) round += session.turns[i].speaker == perspective;
  return round;
}

int AnchorRound(const Session& positive, const Session& negative, int e) {
  const Role role = negative.agent_role;
  const size_t shared = static_cast<size_t>(SharedPrefixLength(positive, negative));
  int before = 0;  // agent outputs inside the shared prefix
  for (size_t i = 0; i < shared; ++i) before += positive.turns[i].speaker == role;
  const bool agent_differs = shared < positive.turns.size() && shared < negative.turns.size() &&
                             positive.turns[shared].speaker == role;
  const int anchor = agent_differs ? before : before - 1;
  const int last = std::min(AgentRoundCount(positive, role), AgentRoundCount(negative, role)) - 1;
  return std::clamp(anchor, e, std::max(e, last));
}

int SelectSegmentProgrammatic(const Session& positive, const Session& negative,
                              int agent_round, int fallback_length) {
  const Role role = positive.agent_role;
  const int available = std::min(AgentRoundCount(positive, role),
                                 AgentRoundCount(negative, role)) - agent_round;
  if (available < 1) Fail(ErrorKind::kRange, "no agent rounds left at the erroneous round");
  int length = fallback_length;
  if (auto decisive = DecisiveRound(positive, role)) {
    length = std::max(1, *decisive - agent_round + 1);
  }
  return std::min(length, available);
}

std::optional<int> ProgrammaticJudge::LocateError(const Session& negative, uint64_t seed) {
  return LocateErrorProgrammatic(negative, policy_, cfg_, seed);
}

int ProgrammaticJudge::SelectSegment(const Session& positive, const Session& negative,
                                     int agent_round) {
  return SelectSegmentProgrammatic(positive, negative, agent_round, cfg_.fallback_length);
}

double PipelineStats::gate_pass_rate() const {
  const int tried = paired + discarded;
  return tried == 0 ? 0.0 : static_cast<double>(paired) / tried;
}

namespace {
nlohmann::json Histogram(const std::map<int, int>& h) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : h) j[std::to_string(k)] = v;
  return j;
}
}  // namespace

nlohmann::json PipelineStats::ToJson() const {
  nlohmann::json j;
  j["negatives"] = negatives;
  j["paired"] = paired;
  j["no_error_count"] = no_error;
  j["discard_count"] = discarded;
  j["judge_failure_count"] = judge_failures;
  j["gate_pass_rate"] = gate_pass_rate();
  j["e_histogram"] = Histogram(e_histogram);
  j["L_histogram"] = Histogram(length_histogram);
  j["L_turns_histogram"] = Histogram(transcript_length_histogram);
  j["truncated_histogram"] = Histogram(truncated_histogram);
  return j;
}

namespace {

enum class Outcome { kPaired, kNoError, kDiscarded, kJudgeFailure };

struct ItemResult {
  Outcome outcome = Outcome::kNoError;
  std::optional<PreferencePair> pair;
  int truncated = 0;
};

}  // namespace

PairBuildResult BuildPairs(std::span<const Session> negatives,
                           std::shared_ptr<const Policy> policy, Judge& judge,
                           const PipelineConfig& cfg) {
  cfg.Validate();
  judge.CheckReady();
  std::vector<ItemResult> items(negatives.size());
  ParallelFor(negatives.size(), cfg.jobs, [&](size_t i) {
    const uint64_t seed = DeriveSeed(cfg.seed, {kPairTag, i});
    const Session& neg = negatives[i];
    const Role role = neg.agent_role;
    ItemResult& r = items[i];
    try {
      const std::optional<int> e = judge.LocateError(neg, DeriveSeed(seed, {1}));
      if (!e) {
        r.outcome = Outcome::kNoError;
        return;
      }
      std::optional<Session> pos = SamplePositive(neg, *e, policy, cfg, DeriveSeed(seed, {2}));
      if (!pos) {
        r.outcome = Outcome::kDiscarded;
        return;
      }
      const int start = AnchorRound(*pos, neg, *e);
      const int length = judge.SelectSegment(*pos, neg, start);
      auto pos_ptr = std::make_shared<const Session>(std::move(*pos));
      auto neg_ptr = std::make_shared<const Session>(neg);
      r.pair.emplace(ExtractSegment(pos_ptr, start, length, role),
                     ExtractSegment(neg_ptr, start, length, role), ProvenanceOf(neg));
      r.truncated = AgentRoundCount(*pos_ptr, role) - (start + length);
      r.outcome = Outcome::kPaired;
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::kNetwork && err.kind() != ErrorKind::kAuth &&
          err.kind() != ErrorKind::kJudgeFormat && err.kind() != ErrorKind::kRange) {
        throw;
      }
      r.outcome = Outcome::kJudgeFailure;
    }
  });
  PairBuildResult out;
  out.stats.negatives = static_cast<int>(negatives.size());
  for (ItemResult& r : items) {
    switch (r.outcome) {
      case Outcome::kNoError: ++out.stats.no_error; break;
      case Outcome::kDiscarded: ++out.stats.discarded; break;
      case Outcome::kJudgeFailure: ++out.stats.judge_failures; break;
      case Outcome::kPaired: {
        ++out.stats.paired;
        const int L = r.pair->length();
        ++out.stats.e_histogram[r.pair->start()];
        ++out.stats.length_histogram[L];
        ++out.stats.transcript_length_histogram[2 * L - 1];
        ++out.stats.truncated_histogram[r.truncated];
        out.pairs.push_back(std::move(*r.pair));
        break;
      }
    }
  }
  return out;
}

SessionPairBuildResult BuildSessionPairs(std::span<const Session> negatives,
                                         std::shared_ptr<const Policy> policy,
                                         const PipelineConfig& cfg) {
  cfg.Validate();
  std::vector<std::optional<SessionPair>> items(negatives.size());
  ParallelFor(negatives.size(), cfg.jobs, [&](size_t i) {
    const Session& neg = negatives[i];
    auto samples = SampleFromScratch(neg, cfg.n_samples, policy, cfg,
                                     DeriveSeed(cfg.seed, {kScratchTag, i}));
    const size_t best = BestSample(samples, neg.agent_role);
    if (!PassesGate(samples[best].score(neg.agent_role), neg.score(neg.agent_role))) return;
    items[i].emplace(std::make_shared<const Session>(std::move(samples[best])),
                     std::make_shared<const Session>(neg), neg.agent_role,
                     ProvenanceOf(neg));
  });
  SessionPairBuildResult out;
  out.stats.negatives = static_cast<int>(negatives.size());
  for (auto& p : items) {
    if (!p) {
      ++out.stats.discarded;
      continue;
    }
    ++out.stats.paired;
    ++out.stats.length_histogram[p->positive().length()];
    out.pairs.push_back(std::move(*p));
  }
  return out;
}

}  // namespace segdpo
