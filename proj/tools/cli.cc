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

#include "cli.h"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "segdpo/error.h"
#include "segdpo/eval.h"
#include "segdpo/negotiation.h"
#include "segdpo/parallel.h"
#include "segdpo/pipeline.h"
#include "segdpo/policy.h"
#include "segdpo/remote_judge.h"
#include "segdpo/serialization.h"
#include "segdpo/trainer.h"

namespace segdpo::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

struct ReproConfig {
  int n_scenarios = 400;
  int max_rounds = kDefaultMaxRounds;
  uint64_t seed = 0;
  std::vector<std::string> methods = {"dpo", "eto", "dmpo", "sdpo", "preferred_sft"};
  int quality_max_count = 5;
};

struct RunConfig {
  TrainConfig bc;     // supervised methods: bc, preferred_sft
  TrainConfig train;  // preference methods
  PipelineConfig pipeline;
  EvalConfig eval;
  ReproConfig repro;
};

Json ToJson(const ReproConfig& r) {
  return {{"n_scenarios", r.n_scenarios},
          {"max_rounds", r.max_rounds},
          {"seed", r.seed},
          {"methods", r.methods},
          {"quality_max_count", r.quality_max_count}};
}

ReproConfig ReproConfigFromJson(const Json& j) {
  if (!j.is_object()) Fail(ErrorKind::kConfig, "'repro' must be an object");
  ReproConfig r;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    try {
      if (k == "n_scenarios") r.n_scenarios = it->get<int>();
      else if (k == "max_rounds") r.max_rounds = it->get<int>();
      else if (k == "seed") r.seed = it->get<uint64_t>();
      else if (k == "methods") r.methods = it->get<std::vector<std::string>>();
      else if (k == "quality_max_count") r.quality_max_count = it->get<int>();
      else Fail(ErrorKind::kConfig, "unknown config field 'repro." + k + "'");
    } catch (const Json::exception&) {
      Fail(ErrorKind::kConfig, "config field 'repro." + k + "' has the wrong type");
    }
  }
  if (r.n_scenarios < 1) Fail(ErrorKind::kConfig, "repro.n_scenarios must be >= 1");
  if (r.max_rounds < 1) Fail(ErrorKind::kConfig, "repro.max_rounds must be >= 1");
  if (r.quality_max_count < 1) Fail(ErrorKind::kConfig, "repro.quality_max_count must be >= 1");
  for (const auto& m : r.methods) {
    if (!IsPreferenceMethod(MethodFromName(m)) && MethodFromName(m) != Method::kPreferredSft) {
      Fail(ErrorKind::kConfig, "repro.methods lists '" + m + "', which is not trained on pairs");
    }
  }
  return r;
}

Json ToJson(const RunConfig& c) {
  return {{"bc", segdpo::ToJson(c.bc)},
          {"train", segdpo::ToJson(c.train)},
          {"pipeline", segdpo::ToJson(c.pipeline)},
          {"eval", segdpo::ToJson(c.eval)},
          {"repro", ToJson(c.repro)}};
}

RunConfig DefaultRunConfig() {
  RunConfig c;
  c.bc.method = Method::kBc;
  c.bc.learning_rate = 0.05;
  c.bc.epochs = 30;
  c.train.method = Method::kSdpo;
  c.train.learning_rate = 0.003;
  c.train.epochs = 20;
  c.pipeline.collect_temperature = 1.0;
  return c;
}

template <typename F>
auto InSection(const char* name, F&& parse) {
  try {
    return parse();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kConfig) throw;
    Fail(ErrorKind::kConfig, std::string(name) + ": " + e.what());
  }
}

RunConfig RunConfigFromJson(const Json& j) {
  if (!j.is_object()) Fail(ErrorKind::kConfig, "the run config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    static const std::set<std::string> kSections = {"bc", "train", "pipeline", "eval", "repro"};
    if (!kSections.count(it.key())) {
      Fail(ErrorKind::kConfig, "unknown config section '" + it.key() + "'");
    }
  }
  RunConfig c;
  c.bc = InSection("bc", [&] { return TrainConfigFromJson(j.at("bc")); });
  c.train = InSection("train", [&] { return TrainConfigFromJson(j.at("train")); });
  c.pipeline = InSection("pipeline", [&] { return PipelineConfigFromJson(j.at("pipeline")); });
  c.eval = InSection("eval", [&] { return EvalConfigFromJson(j.at("eval")); });
  c.repro = ReproConfigFromJson(j.at("repro"));
  return c;
}

// Sets a dot-path such as "train.epochs" to a JSON literal (or, failing
// that, a plain string).
void ApplyOverride(Json& root, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    Fail(ErrorKind::kConfig, "override must look like path.to.key=value: " + assignment);
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  Json* node = &root;
  size_t start = 0;
  while (true) {
    const size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) Fail(ErrorKind::kConfig, "empty key in override path: " + path);
    if (!node->is_object()) Fail(ErrorKind::kConfig, "override path crosses a value: " + path);
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

// Options every command shares.
struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out;
  int jobs = 1;
};

void AddCommon(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "JSON run config")->check(CLI::ExistingFile);
  app->add_option("--set", c.overrides, "override a config value, e.g. train.epochs=5");
  app->add_option("--out", c.out, "output directory")->required();
  app->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
}

// Builds the merged config JSON: defaults, then the file, then --set, then
// whatever the command's own flags change.
Json MergedConfig(const Common& c) {
  Json j = ToJson(DefaultRunConfig());
  if (!c.config_path.empty()) {
    Json file = Json::parse(ReadTextFile(c.config_path), nullptr, false);
    if (file.is_discarded() || !file.is_object()) {
      Fail(ErrorKind::kConfig, c.config_path + ": not a JSON object");
    }
    j.merge_patch(file);
  }
  for (const auto& o : c.overrides) ApplyOverride(j, o);
  for (const char* s : {"bc", "train", "pipeline", "eval"}) j[s]["jobs"] = c.jobs;
  return j;
}

// ---------------------------------------------------------------------------
// Output directories

std::string Timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Progress goes to stderr and, timestamped, to <out>/run.log. Timestamps
// live only there so every other artifact stays reproducible.
class RunLog {
 public:
  RunLog(const fs::path& dir, const std::string& command) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) Fail(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());
    file_.open(dir / "run.log", std::ios::app);
    if (!file_) Fail(ErrorKind::kIo, "cannot write " + (dir / "run.log").string());
    Info("start " + command);
  }
  ~RunLog() { Info("done"); }

  void Info(const std::string& msg) {
    std::cerr << "[segdpo] " << msg << "\n";
    file_ << Timestamp() << " " << msg << "\n";
    file_.flush();
  }

 private:
  std::ofstream file_;
};

std::string Relative(const std::string& path, const fs::path& out) {
  return fs::absolute(path).lexically_normal().lexically_relative(fs::absolute(out).lexically_normal()).generic_string();
}

// config.resolved.json: the full config plus command options. Input paths
// are stored relative to the output directory.
void WriteResolved(const fs::path& out, const std::string& command, const RunConfig& cfg,
                   Json options, const std::map<std::string, std::string>& inputs) {
  Json in = Json::object();
  for (const auto& [k, v] : inputs) {
    if (!v.empty()) in[k] = Relative(v, out);
  }
  Json doc = {{"command", command}, {"config", ToJson(cfg)}, {"options", std::move(options)},
              {"inputs", in}};
  WriteTextFile(out / "config.resolved.json", doc.dump(2) + "\n");
}

std::string Fixed(double v, int digits = 3) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

// ---------------------------------------------------------------------------
// Stages. Each consumes and produces files only.

struct GenScenariosArgs {
  int n = 120;
  uint64_t seed = 0;
  int max_rounds = kDefaultMaxRounds;
};

void GenScenarios(const GenScenariosArgs& a, const RunConfig& cfg, const fs::path& out) {
  if (a.n < 0) Fail(ErrorKind::kConfig, "--n must be >= 0");
  RunLog log(out, "gen-scenarios");
  const auto scenarios = GenerateScenarios(a.n, a.seed, a.max_rounds);
  WriteScenarios(out / "scenarios.jsonl", scenarios);
  WriteResolved(out, "gen-scenarios", cfg,
                {{"n", a.n}, {"seed", a.seed}, {"max_rounds", a.max_rounds}}, {});
  log.Info("wrote " + std::to_string(scenarios.size()) + " scenarios");
}

struct GenExpertArgs {
  std::string scenarios;
  uint64_t seed = 0;
};

void GenExpert(const GenExpertArgs& a, const RunConfig& cfg, const fs::path& out) {
  RunLog log(out, "gen-expert");
  const auto scenarios = ReadScenarios(a.scenarios);
  std::vector<Session> expert(scenarios.size());
  std::vector<double> expert_goal(scenarios.size()), random_goal(scenarios.size());
  ParallelFor(scenarios.size(), cfg.pipeline.jobs, [&](size_t i) {
    Rng rng(DeriveSeed(a.seed, {i, 0}));
    RolloutOptions opt;
    opt.partner_name = "expert";
    expert[i] = Rollout(scenarios[i], Role::kFirst, Actor::Expert(), Actor::Expert(), rng, opt);
    expert_goal[i] = expert[i].score(Role::kFirst).goal();
    Rng rrng(DeriveSeed(a.seed, {i, 1}));
    const Session baseline =
        Rollout(scenarios[i], Role::kFirst, Actor::Random(), Actor::Expert(), rrng, opt);
    random_goal[i] = baseline.score(Role::kFirst).goal();
  });
  WriteSessions(out / "expert.jsonl", expert);
  WriteResolved(out, "gen-expert", cfg, {{"seed", a.seed}}, {{"scenarios", a.scenarios}});
  if (!scenarios.empty()) {
    const double n = static_cast<double>(scenarios.size());
    log.Info("expert mean goal " + Fixed(PairwiseSum(expert_goal.data(), expert_goal.size()) / n) +
             ", random agent vs expert " +
             Fixed(PairwiseSum(random_goal.data(), random_goal.size()) / n));
  }
  log.Info("wrote " + std::to_string(expert.size()) + " expert sessions");
}

struct TrainArgs {
  std::string method;
  std::string sessions;
  std::string pairs;
  std::string init;
  std::string ref;
  std::string resume;
  std::string monitor;
};

bool IsSupervised(Method m) { return m == Method::kBc || m == Method::kPreferredSft; }

void TrainStage(const TrainArgs& a, RunConfig cfg, const fs::path& out) {
  const Method method = MethodFromName(a.method);
  TrainConfig tc = IsSupervised(method) ? cfg.bc : cfg.train;
  tc.method = method;
  tc.Validate();
  if (IsSupervised(method)) {
    cfg.bc = tc;
  } else {
    cfg.train = tc;
  }
  RunLog log(out, std::string("train ") + MethodName(method));

  TrainData data;
  if (method == Method::kBc) {
    if (a.sessions.empty()) Fail(ErrorKind::kConfig, "bc needs --sessions");
    data.sessions = ReadSessions(a.sessions);
  } else {
    if (a.pairs.empty()) Fail(ErrorKind::kConfig, std::string(MethodName(method)) + " needs --pairs");
    for (auto& r : ReadPairs(a.pairs)) {
      if (auto* p = std::get_if<PreferencePair>(&r)) {
        data.segment_pairs.push_back(std::move(*p));
      } else {
        data.session_pairs.push_back(std::get<SessionPair>(std::move(r)));
      }
    }
    const bool wants_sessions = method == Method::kEto || method == Method::kDmpo;
    if (wants_sessions && data.session_pairs.empty() && !data.segment_pairs.empty()) {
      Fail(ErrorKind::kArgument,
           std::string(MethodName(method)) +
               " trains on whole-session pairs; this file holds segment pairs. Build session "
               "pairs with 'collect-pairs --mode from-scratch'.");
    }
    if (!wants_sessions && data.segment_pairs.empty() && !data.session_pairs.empty()) {
      Fail(ErrorKind::kArgument,
           std::string(MethodName(method)) +
               " trains on segment pairs; this file holds whole-session pairs. Build segment "
               "pairs with 'collect-pairs --mode sdpo'.");
    }
    if (method == Method::kDpo) {
      for (const auto& p : data.segment_pairs) {
        if (p.positive().length() != 1 || p.negative().length() != 1) {
          Fail(ErrorKind::kArgument,
               "dpo needs single-round pairs (L = 1 on both sides) but found L = " +
                   std::to_string(p.positive().length()) +
                   "; run 'reshape-pairs --positive-length 1 --negative-length 1' first");
        }
      }
    }
  }
  if (!a.monitor.empty()) data.monitor_pairs = ReadPreferencePairs(a.monitor);

  Policy init = a.init.empty() ? Policy() : LoadPolicy(a.init);
  if (!IsSupervised(method) && a.init.empty()) {
    Fail(ErrorKind::kConfig, std::string(MethodName(method)) + " needs --init (usually the bc checkpoint)");
  }
  std::optional<ReferencePolicy> ref;
  if (!IsSupervised(method)) ref.emplace(a.ref.empty() ? init : LoadPolicy(a.ref));
  std::optional<TrainState> resume;
  if (!a.resume.empty()) resume.emplace(LoadCheckpoint(a.resume));

  const TrainResult r = Train(tc, data, init, ref ? &*ref : nullptr, resume ? &*resume : nullptr);
  SaveCheckpoint((out / "checkpoint.json").string(), r.state, tc);
  WriteTraceCsv((out / "trace.csv").string(), r.trace);
  WriteResolved(out, "train", cfg, {{"method", MethodName(method)}},
                {{"sessions", a.sessions},
                 {"pairs", a.pairs},
                 {"init", a.init},
                 {"ref", a.ref},
                 {"resume", a.resume},
                 {"monitor", a.monitor}});
  std::string summary = "steps " + std::to_string(r.state.step) + ", epochs " +
                        std::to_string(r.epochs_completed);
  if (!r.trace.empty()) {
    summary += ", loss " + Fixed(r.trace.front().loss, 4) + " -> " + Fixed(r.trace.back().loss, 4);
  }
  if (r.early_stopped) summary += " (plateau)";
  log.Info(summary);
}

struct CollectArgs {
  std::string policy;
  std::string scenarios;
  std::string negatives;
  std::string mode = "sdpo";
  std::string judge;
};

void Collect(const CollectArgs& a, RunConfig cfg, const fs::path& out) {
  if (a.mode != "sdpo" && a.mode != "from-scratch") {
    Fail(ErrorKind::kConfig, "--mode must be sdpo or from-scratch");
  }
  if (!a.judge.empty()) cfg.pipeline.judge = JudgeKindFromName(a.judge);
  cfg.pipeline.Validate();
  RunLog log(out, "collect-pairs --mode " + a.mode);
  auto policy = std::make_shared<const Policy>(LoadPolicy(a.policy));
  std::unique_ptr<Judge> judge;
  if (a.mode == "sdpo") {
    judge = MakeJudge(policy, cfg.pipeline);
    judge->CheckReady();  // before any sampling
  }
  std::vector<Session> negatives;
  if (!a.negatives.empty()) {
    negatives = ReadSessions(a.negatives);
  } else {
    if (a.scenarios.empty()) Fail(ErrorKind::kConfig, "collect-pairs needs --scenarios or --negatives");
    negatives = CollectNegatives(policy, ReadScenarios(a.scenarios), cfg.pipeline);
    WriteSessions(out / "negatives.jsonl", negatives);
  }
  log.Info(std::to_string(negatives.size()) + " negatives");
  PipelineStats stats;
  if (a.mode == "sdpo") {
    PairBuildResult r = BuildPairs(negatives, policy, *judge, cfg.pipeline);
    WritePairs(out / "pairs.jsonl", r.pairs);
    stats = r.stats;
  } else {
    SessionPairBuildResult r = BuildSessionPairs(negatives, policy, cfg.pipeline);
    WritePairs(out / "pairs.jsonl", r.pairs);
    stats = r.stats;
  }
  WriteTextFile(out / "stats.json", stats.ToJson().dump(2) + "\n");
  WriteResolved(out, "collect-pairs", cfg, {{"mode", a.mode}},
                {{"policy", a.policy}, {"scenarios", a.scenarios}, {"negatives", a.negatives}});
  log.Info(std::to_string(stats.paired) + " pairs, " + std::to_string(stats.no_error) +
           " without a located error, " + std::to_string(stats.discarded) + " discarded, " +
           std::to_string(stats.judge_failures) + " judge failures");
}

struct ReshapeArgs {
  std::string pairs;
  int positive_length = 1;
  int negative_length = 1;
  bool unsafe_asymmetric = false;
};

void Reshape(const ReshapeArgs& a, const RunConfig& cfg, const fs::path& out) {
  if (a.positive_length < 1 || a.negative_length < 1) {
    Fail(ErrorKind::kConfig, "segment lengths must be >= 1");
  }
  if (a.positive_length != a.negative_length && !a.unsafe_asymmetric) {
    Fail(ErrorKind::kArgument,
         "unequal segment lengths leave the partition term in the loss; pass "
         "--unsafe-asymmetric to build them anyway");
  }
  RunLog log(out, "reshape-pairs");
  std::vector<PreferencePair> reshaped;
  for (const auto& p : ReadPreferencePairs(a.pairs)) {
    reshaped.push_back(ReshapePair(p, a.negative_length, a.positive_length));
  }
  WritePairs(out / "pairs.jsonl", reshaped);
  WriteResolved(out, "reshape-pairs", cfg,
                {{"positive_length", a.positive_length},
                 {"negative_length", a.negative_length},
                 {"unsafe_asymmetric", a.unsafe_asymmetric}},
                {{"pairs", a.pairs}});
  log.Info("reshaped " + std::to_string(reshaped.size()) + " pairs");
}

struct EvalArgs {
  std::string policy;
  std::string agent;  // expert / random instead of a checkpoint
  std::string label = "policy";
  std::string partners;
  std::string scenarios;
  std::vector<std::string> partner_policies;  // name=path
};

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void EvalStage(const EvalArgs& a, RunConfig cfg, const fs::path& out) {
  if (!a.partners.empty()) cfg.eval.partners = SplitList(a.partners);
  cfg.eval.Validate();
  if (a.policy.empty() == a.agent.empty()) {
    Fail(ErrorKind::kConfig, "eval needs exactly one of --policy and --agent");
  }
  RunLog log(out, "eval " + a.label);
  std::map<std::string, std::shared_ptr<const Policy>> named;
  std::map<std::string, std::string> inputs = {{"policy", a.policy}, {"scenarios", a.scenarios}};
  for (const auto& spec : a.partner_policies) {
    const size_t eq = spec.find('=');
    if (eq == std::string::npos) Fail(ErrorKind::kConfig, "--partner-policy wants name=path");
    named[spec.substr(0, eq)] = std::make_shared<const Policy>(LoadPolicy(spec.substr(eq + 1)));
    inputs["partner_policy:" + spec.substr(0, eq)] = spec.substr(eq + 1);
  }
  std::shared_ptr<const Policy> policy;
  std::optional<Actor> agent;
  if (!a.policy.empty()) {
    policy = std::make_shared<const Policy>(LoadPolicy(a.policy));
    agent = Actor::FromPolicy(policy, {cfg.eval.temperature, false}, "agent");
  } else if (a.agent == "expert") {
    agent = Actor::Expert();
  } else if (a.agent == "random") {
    agent = Actor::Random();
  } else {
    Fail(ErrorKind::kConfig, "--agent must be expert or random");
  }
  const std::vector<Scenario> scenarios =
      a.scenarios.empty() ? EvalScenarios(cfg.eval) : ReadScenarios(a.scenarios);
  const EvalReport report = Evaluate(*agent, policy, scenarios, cfg.eval, a.label, &named);
  WriteTextFile(out / "report.json", report.ToJson().dump(1) + "\n");
  WriteTextFile(out / "report.csv", report.ToCsv());
  WriteResolved(out, "eval", cfg, {{"label", a.label}, {"agent", a.agent}}, inputs);
  std::string line = a.label + ": goal " + Fixed(report.goal) + ", relationship " +
                     Fixed(report.relationship) + ", AVG " + Fixed(report.avg);
  for (const auto& p : report.partners) line += " | " + p.partner + " " + Fixed(p.goal);
  log.Info(line);
}

struct CompareArgs {
  std::vector<std::string> reports;
  std::vector<std::string> traces;  // label=path
  int resamples = 1000;
};

void CompareStage(const CompareArgs& a, const RunConfig& cfg, const fs::path& out) {
  RunLog log(out, "compare");
  std::map<std::string, std::string> inputs;
  std::vector<EvalReport> reports;
  for (size_t i = 0; i < a.reports.size(); ++i) {
    reports.push_back(EvalReport::FromJson(Json::parse(ReadTextFile(a.reports[i]), nullptr, false)));
    inputs["report" + std::to_string(i)] = a.reports[i];
  }
  const Comparison c = CompareMethods(reports, a.resamples, cfg.eval.seed);
  WriteTextFile(out / "comparison.csv", c.ToCsv());
  WriteTextFile(out / "comparison.json", c.ToJson().dump(2) + "\n");
  for (const auto& m : c.methods) {
    log.Info("#" + std::to_string(m.rank) + " " + m.label + ": goal " + Fixed(m.goal.mean) + " [" +
             Fixed(m.goal.lo) + ", " + Fixed(m.goal.hi) + "], relationship " +
             Fixed(m.relationship.mean));
  }
  if (!a.traces.empty()) {
    std::vector<std::string> labels;
    std::vector<std::vector<TraceRecord>> traces;
    for (const auto& spec : a.traces) {
      const size_t eq = spec.find('=');
      if (eq == std::string::npos) Fail(ErrorKind::kConfig, "--trace wants label=path");
      labels.push_back(spec.substr(0, eq));
      traces.push_back(ReadTraceCsv(spec.substr(eq + 1)));
      inputs["trace:" + labels.back()] = spec.substr(eq + 1);
    }
    WriteTextFile(out / "gapcurves.csv", GapCurvesCsv(labels, traces));
  }
  WriteResolved(out, "compare", cfg, {{"resamples", a.resamples}}, inputs);
}

struct AblateArgs {
  std::string policy;
  std::string pairs;
  std::string lengths = "[1,1] [3,3] [5,5] [auto,auto] [1,3] [3,5]";
};

// One ablation cell: a fixed round count, "auto" (the judge's choice) or
// "all" (every remaining round).
int LengthFor(const std::string& token, const PreferencePair& p, bool positive) {
  if (token == "auto") return positive ? p.positive().length() : p.negative().length();
  const Segment& seg = positive ? p.positive() : p.negative();
  const int remaining = AgentRoundCount(seg.session(), p.perspective()) - p.start();
  if (token == "all") return remaining;
  return std::stoi(token);
}

std::vector<std::pair<std::string, std::string>> ParseLengths(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  size_t pos = 0;
  while ((pos = text.find('[', pos)) != std::string::npos) {
    const size_t close = text.find(']', pos);
    if (close == std::string::npos) Fail(ErrorKind::kConfig, "unbalanced '[' in --lengths");
    const std::string body = text.substr(pos + 1, close - pos - 1);
    const size_t comma = body.find(',');
    if (comma == std::string::npos) Fail(ErrorKind::kConfig, "length pair needs a comma: [" + body + "]");
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(' '));
      s.erase(s.find_last_not_of(' ') + 1);
      return s;
    };
    std::string neg = trim(body.substr(0, comma)), pos_len = trim(body.substr(comma + 1));
    for (const auto& t : {neg, pos_len}) {
      if (t == "auto" || t == "all") continue;
      if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos || std::stoi(t) < 1) {
        Fail(ErrorKind::kConfig, "segment length must be a positive integer, auto or all: " + t);
      }
    }
    out.emplace_back(neg, pos_len);
    pos = close + 1;
  }
  if (out.empty()) Fail(ErrorKind::kConfig, "--lengths lists no [negative,positive] pairs");
  return out;
}

void Ablate(const AblateArgs& a, RunConfig cfg, const fs::path& out) {
  const auto grid = ParseLengths(a.lengths);
  RunLog log(out, "ablate-segment");
  const Policy init = LoadPolicy(a.policy);
  const ReferencePolicy ref(init);
  const auto pairs = ReadPreferencePairs(a.pairs);
  TrainConfig tc = cfg.train;
  tc.method = Method::kSdpo;
  cfg.train = tc;
  const auto scenarios = EvalScenarios(cfg.eval);
  std::ostringstream table;
  table << "lengths,negative_length,positive_length,pairs,goal,relationship,avg,status\n";
  for (const auto& [neg, pos] : grid) {
    const std::string name = "[" + neg + "," + pos + "]";
    const fs::path dir = out / ("len_" + neg + "_" + pos);
    TrainData data;
    data.monitor_pairs = pairs;
    for (const auto& p : pairs) {
      data.segment_pairs.push_back(ReshapePair(p, LengthFor(neg, p, false), LengthFor(pos, p, true)));
    }
    std::string status = "ok";
    std::optional<EvalReport> report;
    try {
      const TrainResult r = Train(tc, data, init, &ref);
      fs::create_directories(dir);
      SaveCheckpoint((dir / "checkpoint.json").string(), r.state, tc);
      WriteTraceCsv((dir / "trace.csv").string(), r.trace);
      auto trained = std::make_shared<const Policy>(r.state.policy);
      const Actor agent = Actor::FromPolicy(trained, {cfg.eval.temperature, false}, "agent");
      report = Evaluate(agent, trained, scenarios, cfg.eval, name);
      WriteTextFile(dir / "report.json", report->ToJson().dump(1) + "\n");
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kNumeric) throw;
      status = "collapsed";
      log.Info(name + " collapsed: " + e.what());
    }
    table << '"' << name << "\"," << neg << ',' << pos << ',' << data.segment_pairs.size() << ',';
    if (report) {
      table << Fixed(report->goal, 4) << ',' << Fixed(report->relationship, 4) << ','
            << Fixed(report->avg, 4);
      log.Info(name + ": goal " + Fixed(report->goal) + ", relationship " +
               Fixed(report->relationship));
    } else {
      table << "-,-,-";
    }
    table << ',' << status << '\n';
  }
  WriteTextFile(out / "ablation.csv", table.str());
  WriteResolved(out, "ablate-segment", cfg, {{"lengths", a.lengths}},
                {{"policy", a.policy}, {"pairs", a.pairs}});
}

// gen-scenarios -> gen-expert -> train bc -> collect-pairs (both modes) ->
// train each method -> eval -> compare.
void Repro(RunConfig cfg, const fs::path& out) {
  RunLog log(out, "repro");
  const ReproConfig& rc = cfg.repro;
  cfg.pipeline.seed = rc.seed;
  cfg.bc.seed = rc.seed;
  cfg.train.seed = rc.seed;
  WriteResolved(out, "repro", cfg, Json::object(), {});
  auto path = [&](const char* dir, const char* file) { return (out / dir / file).string(); };

  GenScenarios({rc.n_scenarios, DeriveSeed(rc.seed, {0x5ce7}), rc.max_rounds}, cfg, out / "scenarios");
  GenExpert({path("scenarios", "scenarios.jsonl"), rc.seed}, cfg, out / "expert");
  TrainStage({"bc", path("expert", "expert.jsonl"), "", "", "", "", ""}, cfg, out / "bc");
  const std::string bc = path("bc", "checkpoint.json");
  Collect({bc, path("scenarios", "scenarios.jsonl"), "", "sdpo", ""}, cfg, out / "pairs_sdpo");
  Collect({bc, "", path("pairs_sdpo", "negatives.jsonl"), "from-scratch", ""}, cfg,
          out / "pairs_scratch");
  Reshape({path("pairs_sdpo", "pairs.jsonl"), 1, 1, false}, cfg, out / "pairs_dpo");

  std::vector<std::string> reports;
  std::vector<std::string> traces;
  EvalStage({bc, "", "bc", "", "", {}}, cfg, out / "eval_bc");
  reports.push_back(path("eval_bc", "report.json"));
  for (const auto& name : rc.methods) {
    const Method m = MethodFromName(name);
    const std::string label = MethodName(m);
    const char* source = m == Method::kDpo                          ? "pairs_dpo"
                         : (m == Method::kEto || m == Method::kDmpo) ? "pairs_scratch"
                                                                     : "pairs_sdpo";
    const fs::path train_dir = out / ("train_" + label);
    TrainStage({label, "", path(source, "pairs.jsonl"), bc, bc, "", path("pairs_sdpo", "pairs.jsonl")},
               cfg, train_dir);
    const fs::path eval_dir = out / ("eval_" + label);
    EvalStage({(train_dir / "checkpoint.json").string(), "", label, "", "", {}}, cfg, eval_dir);
    reports.push_back((eval_dir / "report.json").string());
    if (IsPreferenceMethod(m)) traces.push_back(label + "=" + (train_dir / "trace.csv").string());
  }
  CompareStage({reports, traces.size() >= 2 ? traces : std::vector<std::string>{}, 1000}, cfg,
               out / "compare");

  const auto negatives = ReadSessions(path("pairs_sdpo", "negatives.jsonl"));
  const auto quality = PositiveQualityComparison(
      negatives, std::make_shared<const Policy>(LoadPolicy(bc)), cfg.pipeline, rc.quality_max_count);
  std::ostringstream q;
  q << "mode,count,goal,relationship,negatives\n";
  for (const auto& row : quality) {
    q << row.mode << ',' << row.count << ',' << Fixed(row.goal, 4) << ','
      << Fixed(row.relationship, 4) << ',' << row.negatives << '\n';
  }
  WriteTextFile(out / "compare" / "quality.csv", q.str());
  for (const auto& row : quality) {
    if (row.count != rc.quality_max_count) continue;
    log.Info("positive quality (" + row.mode + ", best of " + std::to_string(row.count) +
             "): goal " + Fixed(row.goal) + ", relationship " + Fixed(row.relationship));
  }
}

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
    case ErrorKind::kAuth:
      return kExitConfig;
    case ErrorKind::kIo:
    case ErrorKind::kParse:
    case ErrorKind::kNetwork:
      return kExitIo;
    case ErrorKind::kRange:
    case ErrorKind::kArgument:
    case ErrorKind::kRule:
    case ErrorKind::kState:
    case ErrorKind::kDomain:
    case ErrorKind::kNumeric:
    case ErrorKind::kLoad:
    case ErrorKind::kJudgeFormat:
      return kExitContract;
  }
  return kExitFailure;
}

}  // namespace

std::string DefaultConfigJson() { return ToJson(DefaultRunConfig()).dump(2); }

int Run(const std::vector<std::string>& args) {
  CLI::App app{"Segment-level preference optimization for negotiation agents"};
  app.require_subcommand(1);
  std::function<void()> action;
  Common common;

  GenScenariosArgs gs;
  auto* gen_scenarios = app.add_subcommand("gen-scenarios", "generate negotiation scenarios");
  gen_scenarios->add_option("--n", gs.n, "number of scenarios");
  gen_scenarios->add_option("--seed", gs.seed, "scenario seed");
  gen_scenarios->add_option("--max-rounds", gs.max_rounds, "rounds per party")->check(CLI::PositiveNumber);
  AddCommon(gen_scenarios, common);

  GenExpertArgs ge;
  auto* gen_expert = app.add_subcommand("gen-expert", "expert self-play corpus for behavioral cloning");
  gen_expert->add_option("--scenarios", ge.scenarios, "scenarios.jsonl")->required();
  gen_expert->add_option("--seed", ge.seed, "rollout seed");
  AddCommon(gen_expert, common);

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "train a policy");
  train->add_option("--method", tr.method, "bc, preferred-sft, dpo, eto, dmpo or sdpo")->required();
  train->add_option("--sessions", tr.sessions, "session corpus (bc)");
  train->add_option("--pairs", tr.pairs, "pairs.jsonl (preference methods, preferred-sft)");
  train->add_option("--init", tr.init, "initial policy checkpoint");
  train->add_option("--ref", tr.ref, "reference policy (defaults to --init)");
  train->add_option("--resume", tr.resume, "checkpoint to continue from");
  train->add_option("--monitor", tr.monitor, "segment pairs whose log-prob gaps are traced");
  AddCommon(train, common);

  CollectArgs co;
  auto* collect = app.add_subcommand("collect-pairs", "build preference pairs from a policy's failures");
  collect->add_option("--policy", co.policy, "policy checkpoint")->required();
  collect->add_option("--scenarios", co.scenarios, "scenarios.jsonl");
  collect->add_option("--negatives", co.negatives, "reuse previously collected negatives");
  collect->add_option("--mode", co.mode, "sdpo (segment pairs) or from-scratch (session pairs)");
  collect->add_option("--judge", co.judge, "programmatic or remote");
  AddCommon(collect, common);

  ReshapeArgs rs;
  auto* reshape = app.add_subcommand("reshape-pairs", "re-cut segment pairs to fixed lengths");
  reshape->add_option("--pairs", rs.pairs, "pairs.jsonl")->required();
  reshape->add_option("--positive-length", rs.positive_length, "agent rounds on the positive side");
  reshape->add_option("--negative-length", rs.negative_length, "agent rounds on the negative side");
  reshape->add_flag("--unsafe-asymmetric", rs.unsafe_asymmetric, "allow unequal lengths");
  AddCommon(reshape, common);

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "evaluate a policy against partners");
  eval->add_option("--policy", ev.policy, "policy checkpoint");
  eval->add_option("--agent", ev.agent, "built-in agent instead of a checkpoint: expert or random");
  eval->add_option("--label", ev.label, "name used in reports");
  eval->add_option("--partners", ev.partners, "comma-separated partner list");
  eval->add_option("--scenarios", ev.scenarios, "scenarios.jsonl (default: generated from eval.seed)");
  eval->add_option("--partner-policy", ev.partner_policies, "name=checkpoint for policy:<name> partners");
  AddCommon(eval, common);

  CompareArgs cp;
  auto* compare = app.add_subcommand("compare", "rank evaluation reports with bootstrap intervals");
  compare->add_option("--reports", cp.reports, "report.json files")->required();
  compare->add_option("--trace", cp.traces, "label=trace.csv for gap curves");
  compare->add_option("--resamples", cp.resamples, "bootstrap resamples")->check(CLI::PositiveNumber);
  AddCommon(compare, common);

  AblateArgs ab;
  auto* ablate = app.add_subcommand("ablate-segment", "segment-length ablation grid");
  ablate->add_option("--policy", ab.policy, "initial and reference policy")->required();
  ablate->add_option("--pairs", ab.pairs, "segment pairs from collect-pairs")->required();
  ablate->add_option("--lengths", ab.lengths, "[negative,positive] cells, e.g. \"[1,1] [3,3] [auto,auto]\"");
  AddCommon(ablate, common);

  std::optional<uint64_t> repro_seed;
  auto* repro = app.add_subcommand("repro", "run the whole desk-scale experiment");
  repro->add_option("--seed", repro_seed, "master seed (sets repro.seed)");
  AddCommon(repro, common);

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    Json merged = MergedConfig(common);
    if (repro_seed) merged["repro"]["seed"] = *repro_seed;
    const RunConfig cfg = RunConfigFromJson(merged);
    const fs::path out = common.out;
    if (*gen_scenarios) GenScenarios(gs, cfg, out);
    if (*gen_expert) GenExpert(ge, cfg, out);
    if (*train) TrainStage(tr, cfg, out);
    if (*collect) Collect(co, cfg, out);
    if (*reshape) Reshape(rs, cfg, out);
    if (*eval) EvalStage(ev, cfg, out);
    if (*compare) CompareStage(cp, cfg, out);
    if (*ablate) Ablate(ab, cfg, out);
    if (*repro) Repro(cfg, out);
  } catch (const Error& e) {
    std::cerr << "segdpo: " << ErrorKindName(e.kind()) << " error: " << e.what() << "\n";
    return ExitCodeFor(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "segdpo: io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "segdpo: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace segdpo::cli
