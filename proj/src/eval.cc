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

#include "segdpo/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "segdpo/error.h"
#include "segdpo/parallel.h"
#include "segdpo/rng.h"

namespace segdpo {

namespace {

constexpr uint64_t kEvalTag = 0xe7a1;
constexpr uint64_t kEvalScenarioTag = 0xe7a15c;
constexpr uint64_t kQualityTag = 0x9a11;

double Mean(std::span<const double> x) {
  return x.empty() ? 0.0 : PairwiseSum(x.data(), x.size()) / static_cast<double>(x.size());
}

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Per-session goals of the reports in one label, averaged over the reports.
struct Pooled {
  std::string label;
  int reports = 0;
  std::vector<double> goal;  // per session
  std::vector<double> rel;
  double avg = 0.0;
  double hard_goal = 0.0;
};

std::vector<double> PerScenario(const std::vector<double>& per_session,
                                const std::vector<SessionOutcome>& layout, size_t n_scenarios) {
  std::vector<std::vector<double>> buckets(n_scenarios);
  for (size_t k = 0; k < layout.size(); ++k) {
    buckets[layout[k].scenario_index].push_back(per_session[k]);
  }
  std::vector<double> out(n_scenarios);
  for (size_t s = 0; s < n_scenarios; ++s) out[s] = Mean(buckets[s]);
  return out;
}

}  // namespace

void EvalConfig::Validate() const {
  if (partners.empty()) Fail(ErrorKind::kConfig, "at least one evaluation partner is required");
  for (const auto& p : partners) {
    if (p == "self" || p == "expert" || p == "random" || p.rfind("policy:", 0) == 0) continue;
    Persona::Parse(p);
  }
  if (n_scenarios < 1) Fail(ErrorKind::kConfig, "n_scenarios must be >= 1");
  if (!(temperature > 0.0)) Fail(ErrorKind::kConfig, "temperature must be positive");
  if (truncate_agent_rounds < 0) Fail(ErrorKind::kConfig, "truncate_agent_rounds must be >= 0");
  if (!(hard_quartile > 0.0 && hard_quartile <= 1.0)) {
    Fail(ErrorKind::kConfig, "hard_quartile must lie in (0, 1]");
  }
  if (jobs < 1) Fail(ErrorKind::kConfig, "jobs must be >= 1");
}

nlohmann::json ToJson(const EvalConfig& c) {
  return {{"partners", c.partners},
          {"n_scenarios", c.n_scenarios},
          {"temperature", c.temperature},
          {"truncate_agent_rounds", c.truncate_agent_rounds},
          {"hard_quartile", c.hard_quartile},
          {"seed", c.seed},
          {"jobs", c.jobs}};
}

EvalConfig EvalConfigFromJson(const nlohmann::json& j) {
  if (!j.is_object()) Fail(ErrorKind::kConfig, "eval config must be an object");
  EvalConfig c;
  std::set<std::string> seen;
  auto take = [&](const char* key, auto& out) {
    seen.insert(key);
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
      out = it->get<std::decay_t<decltype(out)>>();
    } catch (const nlohmann::json::exception&) {
      Fail(ErrorKind::kConfig, std::string("config field '") + key + "' has the wrong type");
    }
  };
  take("partners", c.partners);
  take("n_scenarios", c.n_scenarios);
  take("temperature", c.temperature);
  take("truncate_agent_rounds", c.truncate_agent_rounds);
  take("hard_quartile", c.hard_quartile);
  take("seed", c.seed);
  take("jobs", c.jobs);
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!seen.count(it.key())) Fail(ErrorKind::kConfig, "unknown config field '" + it.key() + "'");
  }
  c.Validate();
  return c;
}

std::vector<Scenario> EvalScenarios(const EvalConfig& cfg) {
  return GenerateScenarios(cfg.n_scenarios, DeriveSeed(cfg.seed, {kEvalScenarioTag}));
}

EvalReport Evaluate(const Actor& agent, std::shared_ptr<const Policy> self_policy,
                    std::span<const Scenario> scenarios, const EvalConfig& cfg,
                    const std::string& label,
                    const std::map<std::string, std::shared_ptr<const Policy>>* named) {
  cfg.Validate();
  std::vector<Actor> partners;
  for (const auto& p : cfg.partners) {
    if (p == "self" && !self_policy) {
      partners.push_back(agent);
    } else {
      partners.push_back(MakePartner(p, self_policy, cfg.temperature, named));
    }
  }
  const std::vector<bool> hard = HardMask(scenarios, cfg.hard_quartile);
  const size_t n_partners = partners.size();
  const size_t n = scenarios.size() * 2 * n_partners;

  EvalReport report;
  report.label = label;
  report.seed = cfg.seed;
  for (const auto& s : scenarios) report.scenario_ids.push_back(s.id);
  report.sessions.resize(n);

  ParallelFor(n, cfg.jobs, [&](size_t k) {
    const size_t i = k / (2 * n_partners);
    const size_t seat = (k / n_partners) % 2;
    const size_t p = k % n_partners;
    const Role role = seat == 0 ? Role::kFirst : Role::kSecond;
    Rng rng(DeriveSeed(cfg.seed, {kEvalTag, i, seat, p}));
    RolloutOptions opt;
    opt.truncate_agent_rounds = cfg.truncate_agent_rounds;
    opt.partner_name = cfg.partners[p];
    const Session s = Rollout(scenarios[i], role, agent, partners[p], rng, opt);
    SessionOutcome& o = report.sessions[k];
    o.scenario_index = static_cast<int>(i);
    o.scenario_id = scenarios[i].id;
    o.role = role;
    o.partner = cfg.partners[p];
    o.goal = s.score(role).goal();
    o.relationship = s.score(role).relationship();
    o.agent_rounds = AgentRoundCount(s, role);
    o.turns = static_cast<int>(s.turns.size());
    o.deal = s.deal.has_value();
    o.hard = hard[i];
  });

  std::vector<double> goals, rels, hard_goals, hard_rels, rounds, turns, cells;
  for (size_t p = 0; p < n_partners; ++p) {
    std::vector<double> g, r, hg, hr;
    for (const auto& o : report.sessions) {
      if (o.partner != cfg.partners[p]) continue;
      g.push_back(o.goal);
      r.push_back(o.relationship);
      if (o.hard) {
        hg.push_back(o.goal);
        hr.push_back(o.relationship);
      }
    }
    PartnerSummary ps;
    ps.partner = cfg.partners[p];
    ps.sessions = static_cast<int>(g.size());
    ps.goal = Mean(g);
    ps.relationship = Mean(r);
    ps.hard_goal = Mean(hg);
    ps.hard_relationship = Mean(hr);
    cells.push_back(ps.goal);
    cells.push_back(ps.relationship);
    report.partners.push_back(ps);
  }
  for (const auto& o : report.sessions) {
    goals.push_back(o.goal);
    rels.push_back(o.relationship);
    rounds.push_back(o.agent_rounds);
    turns.push_back(o.turns);
    if (o.hard) {
      hard_goals.push_back(o.goal);
      hard_rels.push_back(o.relationship);
    }
  }
  report.avg = Mean(cells);
  report.goal = Mean(goals);
  report.relationship = Mean(rels);
  report.hard_goal = Mean(hard_goals);
  report.hard_relationship = Mean(hard_rels);
  report.mean_agent_rounds = Mean(rounds);
  report.mean_turns = Mean(turns);
  return report;
}

EvalReport EvaluatePolicy(std::shared_ptr<const Policy> policy, const EvalConfig& cfg,
                          const std::string& label) {
  const auto scenarios = EvalScenarios(cfg);
  const Actor agent = Actor::FromPolicy(policy, {cfg.temperature, false}, "agent");
  return Evaluate(agent, policy, scenarios, cfg, label);
}

nlohmann::json EvalReport::ToJson() const {
  nlohmann::json j;
  j["label"] = label;
  j["seed"] = seed;
  j["scenario_ids"] = scenario_ids;
  nlohmann::json parts = nlohmann::json::array();
  for (const auto& p : partners) {
    parts.push_back({{"partner", p.partner},
                     {"sessions", p.sessions},
                     {"goal", p.goal},
                     {"relationship", p.relationship},
                     {"hard_goal", p.hard_goal},
                     {"hard_relationship", p.hard_relationship}});
  }
  j["partners"] = parts;
  j["avg"] = avg;
  j["goal"] = goal;
  j["relationship"] = relationship;
  j["hard_goal"] = hard_goal;
  j["hard_relationship"] = hard_relationship;
  j["mean_agent_rounds"] = mean_agent_rounds;
  j["mean_turns"] = mean_turns;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& o : sessions) {
    rows.push_back({{"scenario", o.scenario_index},
                    {"role", RoleName(o.role)},
                    {"partner", o.partner},
                    {"goal", o.goal},
                    {"relationship", o.relationship},
                    {"agent_rounds", o.agent_rounds},
                    {"turns", o.turns},
                    {"deal", o.deal},
                    {"hard", o.hard}});
  }
  j["sessions"] = rows;
  return j;
}

EvalReport EvalReport::FromJson(const nlohmann::json& j) {
  try {
    EvalReport r;
    r.label = j.at("label").get<std::string>();
    r.seed = j.at("seed").get<uint64_t>();
    r.scenario_ids = j.at("scenario_ids").get<std::vector<std::string>>();
    for (const auto& p : j.at("partners")) {
      r.partners.push_back({p.at("partner").get<std::string>(), p.at("sessions").get<int>(),
                            p.at("goal").get<double>(), p.at("relationship").get<double>(),
                            p.at("hard_goal").get<double>(),
                            p.at("hard_relationship").get<double>()});
    }
    r.avg = j.at("avg").get<double>();
    r.goal = j.at("goal").get<double>();
    r.relationship = j.at("relationship").get<double>();
    r.hard_goal = j.at("hard_goal").get<double>();
    r.hard_relationship = j.at("hard_relationship").get<double>();
    r.mean_agent_rounds = j.at("mean_agent_rounds").get<double>();
    r.mean_turns = j.at("mean_turns").get<double>();
    for (const auto& s : j.at("sessions")) {
      SessionOutcome o;
      o.scenario_index = s.at("scenario").get<int>();
      if (o.scenario_index < 0 || o.scenario_index >= static_cast<int>(r.scenario_ids.size())) {
        Fail(ErrorKind::kParse, "session refers to an unknown scenario");
      }
      o.scenario_id = r.scenario_ids[o.scenario_index];
      o.role = RoleFromName(s.at("role").get<std::string>());
      o.partner = s.at("partner").get<std::string>();
      o.goal = s.at("goal").get<int>();
      o.relationship = s.at("relationship").get<int>();
      o.agent_rounds = s.at("agent_rounds").get<int>();
      o.turns = s.at("turns").get<int>();
      o.deal = s.at("deal").get<bool>();
      o.hard = s.at("hard").get<bool>();
      r.sessions.push_back(o);
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kParse, std::string("malformed eval report: ") + e.what());
  }
}

std::string EvalReport::ToCsv() const {
  std::ostringstream out;
  out << "label,partner,sessions,goal,relationship,hard_goal,hard_relationship\n";
  for (const auto& p : partners) {
    out << label << ',' << p.partner << ',' << p.sessions << ',' << Num(p.goal) << ','
        << Num(p.relationship) << ',' << Num(p.hard_goal) << ',' << Num(p.hard_relationship)
        << '\n';
  }
  out << label << ",ALL," << sessions.size() << ',' << Num(goal) << ',' << Num(relationship)
      << ',' << Num(hard_goal) << ',' << Num(hard_relationship) << '\n';
  out << label << ",AVG,," << Num(avg) << ",,,\n";
  return out.str();
}

Interval BootstrapMean(std::span<const double> values, int resamples, uint64_t seed,
                       double level) {
  if (values.empty()) Fail(ErrorKind::kArgument, "bootstrap of an empty sample");
  if (resamples < 1) Fail(ErrorKind::kArgument, "resamples must be >= 1");
  if (!(level > 0.0 && level < 1.0)) Fail(ErrorKind::kArgument, "level must lie in (0, 1)");
  Interval out;
  out.mean = Mean(values);
  Rng rng(seed);
  std::vector<double> means(resamples);
  std::vector<double> draw(values.size());
  for (int b = 0; b < resamples; ++b) {
    for (double& d : draw) d = values[rng.UniformInt(values.size())];
    means[b] = Mean(draw);
  }
  std::sort(means.begin(), means.end());
  const double alpha = (1.0 - level) / 2.0;
  auto quantile = [&](double q) {
    const double pos = q * (resamples - 1);
    const size_t lo = static_cast<size_t>(std::floor(pos));
    const size_t hi = std::min<size_t>(lo + 1, resamples - 1);
    return means[lo] + (pos - lo) * (means[hi] - means[lo]);
  };
  out.lo = quantile(alpha);
  out.hi = quantile(1.0 - alpha);
  return out;
}

PairwiseRow Comparison::Pair(const std::string& a, const std::string& b) const {
  for (const auto& row : pairwise) {
    if (row.a == a && row.b == b) return row;
    if (row.a == b && row.b == a) {
      PairwiseRow flipped = row;
      std::swap(flipped.a, flipped.b);
      flipped.goal_difference = {-row.goal_difference.mean, -row.goal_difference.hi,
                                 -row.goal_difference.lo};
      flipped.win_rate = 1.0 - row.win_rate;
      return flipped;
    }
  }
  Fail(ErrorKind::kArgument, "no comparison between '" + a + "' and '" + b + "'");
}

const MethodRow& Comparison::Method(const std::string& label) const {
  for (const auto& m : methods) {
    if (m.label == label) return m;
  }
  Fail(ErrorKind::kArgument, "no method '" + label + "' in the comparison");
}

nlohmann::json Comparison::ToJson() const {
  auto interval = [](const Interval& i) {
    return nlohmann::json{{"mean", i.mean}, {"lo", i.lo}, {"hi", i.hi}};
  };
  nlohmann::json j;
  j["methods"] = nlohmann::json::array();
  for (const auto& m : methods) {
    j["methods"].push_back({{"label", m.label},
                            {"reports", m.reports},
                            {"goal", interval(m.goal)},
                            {"relationship", interval(m.relationship)},
                            {"avg", m.avg},
                            {"hard_goal", m.hard_goal},
                            {"rank", m.rank}});
  }
  j["pairwise"] = nlohmann::json::array();
  for (const auto& p : pairwise) {
    j["pairwise"].push_back({{"a", p.a},
                             {"b", p.b},
                             {"goal_difference", interval(p.goal_difference)},
                             {"win_rate", p.win_rate}});
  }
  return j;
}

std::string Comparison::ToCsv() const {
  std::ostringstream out;
  out << "kind,a,b,rank,reports,goal,goal_lo,goal_hi,relationship,relationship_lo,"
         "relationship_hi,avg,hard_goal,win_rate\n";
  for (const auto& m : methods) {
    out << "method," << m.label << ",," << m.rank << ',' << m.reports << ',' << Num(m.goal.mean)
        << ',' << Num(m.goal.lo) << ',' << Num(m.goal.hi) << ',' << Num(m.relationship.mean)
        << ',' << Num(m.relationship.lo) << ',' << Num(m.relationship.hi) << ',' << Num(m.avg)
        << ',' << Num(m.hard_goal) << ",\n";
  }
  for (const auto& p : pairwise) {
    out << "pair," << p.a << ',' << p.b << ",,," << Num(p.goal_difference.mean) << ','
        << Num(p.goal_difference.lo) << ',' << Num(p.goal_difference.hi) << ",,,,,,"
        << Num(p.win_rate) << '\n';
  }
  return out.str();
}

Comparison CompareMethods(std::span<const EvalReport> reports, int resamples, uint64_t seed) {
  if (reports.size() < 2) Fail(ErrorKind::kArgument, "a comparison needs at least two reports");
  const EvalReport& base = reports.front();
  for (const auto& r : reports) {
    if (r.seed != base.seed || r.scenario_ids != base.scenario_ids) {
      Fail(ErrorKind::kArgument, "reports '" + base.label + "' and '" + r.label +
                                     "' were not evaluated on the same scenario seeds");
    }
    bool same = r.sessions.size() == base.sessions.size();
    for (size_t k = 0; same && k < r.sessions.size(); ++k) {
      const auto& x = r.sessions[k];
      const auto& y = base.sessions[k];
      same = x.scenario_index == y.scenario_index && x.role == y.role && x.partner == y.partner;
    }
    if (!same) {
      Fail(ErrorKind::kArgument, "reports '" + base.label + "' and '" + r.label +
                                     "' do not share partners and seats");
    }
  }

  std::vector<Pooled> pooled;
  for (const auto& r : reports) {
    auto it = std::find_if(pooled.begin(), pooled.end(),
                           [&](const Pooled& p) { return p.label == r.label; });
    if (it == pooled.end()) {
      pooled.push_back({r.label, 0, std::vector<double>(r.sessions.size(), 0.0),
                        std::vector<double>(r.sessions.size(), 0.0), 0.0, 0.0});
      it = pooled.end() - 1;
    }
    ++it->reports;
    for (size_t k = 0; k < r.sessions.size(); ++k) {
      it->goal[k] += r.sessions[k].goal;
      it->rel[k] += r.sessions[k].relationship;
    }
    it->avg += r.avg;
    it->hard_goal += r.hard_goal;
  }
  if (pooled.size() < 2) Fail(ErrorKind::kArgument, "a comparison needs two distinct labels");
  for (auto& p : pooled) {
    for (double& g : p.goal) g /= p.reports;
    for (double& r : p.rel) r /= p.reports;
    p.avg /= p.reports;
    p.hard_goal /= p.reports;
  }

  const size_t n_scen = base.scenario_ids.size();
  Comparison out;
  for (size_t m = 0; m < pooled.size(); ++m) {
    const auto& p = pooled[m];
    MethodRow row;
    row.label = p.label;
    row.reports = p.reports;
    row.goal = BootstrapMean(PerScenario(p.goal, base.sessions, n_scen), resamples,
                             DeriveSeed(seed, {m, 0}));
    row.relationship = BootstrapMean(PerScenario(p.rel, base.sessions, n_scen), resamples,
                                     DeriveSeed(seed, {m, 1}));
    row.avg = p.avg;
    row.hard_goal = p.hard_goal;
    out.methods.push_back(row);
  }
  std::vector<size_t> order(out.methods.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return out.methods[a].goal.mean > out.methods[b].goal.mean;
  });
  for (size_t r = 0; r < order.size(); ++r) out.methods[order[r]].rank = static_cast<int>(r) + 1;

  for (size_t a = 0; a < pooled.size(); ++a) {
    for (size_t b = a + 1; b < pooled.size(); ++b) {
      std::vector<double> diff(pooled[a].goal.size());
      double wins = 0.0;
      for (size_t k = 0; k < diff.size(); ++k) {
        diff[k] = pooled[a].goal[k] - pooled[b].goal[k];
        wins += diff[k] > 0.0 ? 1.0 : diff[k] == 0.0 ? 0.5 : 0.0;
      }
      PairwiseRow row;
      row.a = pooled[a].label;
      row.b = pooled[b].label;
      row.goal_difference = BootstrapMean(PerScenario(diff, base.sessions, n_scen), resamples,
                                          DeriveSeed(seed, {0x9a1, a, b}));
      row.win_rate = wins / static_cast<double>(diff.size());
      out.pairwise.push_back(row);
    }
  }
  return out;
}

std::vector<QualityRow> PositiveQualityComparison(std::span<const Session> negatives,
                                                  std::shared_ptr<const Policy> policy,
                                                  const PipelineConfig& cfg, int max_count) {
  cfg.Validate();
  if (max_count < 1) Fail(ErrorKind::kArgument, "max_count must be >= 1");
  if (negatives.empty()) return {};
  struct Item {
    bool located = false;
    std::vector<Scores> segment;  // best of the first k, k = 1..max_count
    std::vector<Scores> scratch;
  };
  std::vector<Item> items(negatives.size());
  auto best_prefix = [&](const std::vector<Session>& samples, Role role) {
    std::vector<Scores> best;
    for (size_t k = 1; k <= samples.size(); ++k) {
      const auto first = std::span<const Session>(samples).first(k);
      best.push_back(first[BestSample(first, role)].score(role));
    }
    return best;
  };
  ParallelFor(negatives.size(), cfg.jobs, [&](size_t i) {
    const Session& neg = negatives[i];
    const auto e = LocateErrorProgrammatic(neg, policy, cfg, DeriveSeed(cfg.seed, {kQualityTag, i, 0}));
    if (!e) return;
    Item& item = items[i];
    item.located = true;
    item.segment = best_prefix(SamplePrefixRollouts(neg, *e, max_count, policy, cfg,
                                                    DeriveSeed(cfg.seed, {kQualityTag, i, 1})),
                               neg.agent_role);
    item.scratch = best_prefix(
        SampleFromScratch(neg, max_count, policy, cfg, DeriveSeed(cfg.seed, {kQualityTag, i, 2})),
        neg.agent_role);
  });
  std::vector<QualityRow> rows;
  for (const char* mode : {"segment", "from_scratch"}) {
    const bool seg = std::string(mode) == "segment";
    for (int k = 1; k <= max_count; ++k) {
      std::vector<double> g, r;
      for (const auto& item : items) {
        if (!item.located) continue;
        const Scores& s = (seg ? item.segment : item.scratch)[k - 1];
        g.push_back(s.goal());
        r.push_back(s.relationship());
      }
      if (g.empty()) continue;
      rows.push_back({mode, k, Mean(g), Mean(r), static_cast<int>(g.size())});
    }
  }
  return rows;
}

std::string GapCurvesCsv(const std::vector<std::string>& labels,
                         const std::vector<std::vector<TraceRecord>>& traces) {
  if (labels.size() != traces.size()) Fail(ErrorKind::kArgument, "one label per trace");
  if (traces.size() < 2) Fail(ErrorKind::kArgument, "gap curves need at least two traces");
  std::vector<std::vector<TraceRecord>> measured(traces.size());
  for (size_t m = 0; m < traces.size(); ++m) {
    for (const auto& r : traces[m]) {
      if (std::isfinite(r.gap_segment) && std::isfinite(r.gap_first_turn)) {
        measured[m].push_back(r);
      }
    }
    std::stable_sort(measured[m].begin(), measured[m].end(),
                     [](const TraceRecord& a, const TraceRecord& b) { return a.step < b.step; });
    if (measured[m].empty()) Fail(ErrorKind::kArgument, "trace '" + labels[m] + "' has no gaps");
  }
  int64_t lo = measured[0].front().step;
  int64_t hi = measured[0].back().step;
  for (const auto& t : measured) {
    lo = std::max(lo, t.front().step);
    hi = std::min(hi, t.back().step);
  }
  auto at = [](const std::vector<TraceRecord>& t, int64_t step, bool segment) {
    auto value = [&](const TraceRecord& r) { return segment ? r.gap_segment : r.gap_first_turn; };
    auto it = std::lower_bound(t.begin(), t.end(), step,
                               [](const TraceRecord& r, int64_t s) { return r.step < s; });
    if (it->step == step || it == t.begin()) return value(*it);
    const auto& a = *(it - 1);
    const double w = static_cast<double>(step - a.step) / static_cast<double>(it->step - a.step);
    return value(a) + w * (value(*it) - value(a));
  };
  std::ostringstream out;
  out << "step";
  for (const auto& l : labels) out << ',' << l << "_gap_segment," << l << "_gap_first_turn";
  out << '\n';
  int64_t previous = -1;
  for (const auto& r : measured[0]) {
    if (r.step < lo || r.step > hi || r.step == previous) continue;
    previous = r.step;
    out << r.step;
    for (const auto& t : measured) {
      out << ',' << Num(at(t, r.step, true)) << ',' << Num(at(t, r.step, false));
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace segdpo
