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

#include "segdpo/trainer.h"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "segdpo/error.h"
#include "segdpo/parallel.h"
#include "segdpo/serialization.h"

namespace segdpo {

namespace {
// No sane run gets near this; every loss here starts at O(1) per example.
constexpr double kDivergedLoss = 1e6;
constexpr const char* kMethodNames[] = {"bc", "preferred_sft", "dpo", "eto", "dmpo", "sdpo"};
}  // namespace

const char* MethodName(Method m) { return kMethodNames[static_cast<int>(m)]; }

Method MethodFromName(std::string_view name) {
  if (name == "preferred-sft") return Method::kPreferredSft;
  for (int i = 0; i < 6; ++i) {
    if (name == kMethodNames[i]) return static_cast<Method>(i);
  }
  Fail(ErrorKind::kConfig, "unknown method '" + std::string(name) +
                               "' (expected bc, preferred-sft, dpo, eto, dmpo or sdpo)");
}

bool IsPreferenceMethod(Method m) {
  return m == Method::kDpo || m == Method::kEto || m == Method::kDmpo || m == Method::kSdpo;
}

double DefaultLearningRate(Method m) {
  switch (m) {
    case Method::kBc:
    case Method::kPreferredSft:
      return 1e-2;
    default:
      return 1e-3;
  }
}

double TrainConfig::EffectiveLearningRate() const {
  return learning_rate > 0.0 ? learning_rate : DefaultLearningRate(method);
}

void TrainConfig::Validate() const {
  if (batch_size < 1) Fail(ErrorKind::kConfig, "batch_size must be >= 1");
  if (learning_rate < 0.0 || !std::isfinite(learning_rate)) {
    Fail(ErrorKind::kConfig, "learning_rate must be positive (or 0 for the default)");
  }
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) {
    Fail(ErrorKind::kConfig, "warmup_fraction must lie in [0, 1)");
  }
  if (epochs < 0) Fail(ErrorKind::kConfig, "epochs must be >= 0");
  if (weight_decay < 0.0) Fail(ErrorKind::kConfig, "weight_decay must be >= 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    Fail(ErrorKind::kConfig, "Adam betas must lie in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) Fail(ErrorKind::kConfig, "adam_epsilon must be positive");
  if (plateau_tolerance < 0.0) Fail(ErrorKind::kConfig, "plateau_tolerance must be >= 0");
  if (jobs < 1) Fail(ErrorKind::kConfig, "jobs must be >= 1");
  if (max_steps < 0) Fail(ErrorKind::kConfig, "max_steps must be >= 0");
  if (trace_every < 1) Fail(ErrorKind::kConfig, "trace_every must be >= 1");
  if (IsPreferenceMethod(method)) loss().Validate();
}

nlohmann::json ToJson(const TrainConfig& c) {
  nlohmann::json j;
  j["method"] = MethodName(c.method);
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.EffectiveLearningRate();
  j["lr_schedule"] = "cosine_decay";
  j["warmup_fraction"] = c.warmup_fraction;
  j["epochs"] = c.epochs;
  j["beta"] = c.beta;
  j["gamma"] = c.gamma;
  j["weight_decay"] = c.weight_decay;
  j["adam_beta1"] = c.adam_beta1;
  j["adam_beta2"] = c.adam_beta2;
  j["adam_epsilon"] = c.adam_epsilon;
  j["plateau_tolerance"] = c.plateau_tolerance;
  j["early_stop"] = c.early_stop;
  j["bc_turns"] = c.bc_turns == BcTurns::kAllParties ? "all" : "agent";
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  j["max_steps"] = c.max_steps;
  j["trace_every"] = c.trace_every;
  return j;
}

TrainConfig TrainConfigFromJson(const nlohmann::json& j) {
  if (!j.is_object()) Fail(ErrorKind::kConfig, "train config must be an object");
  TrainConfig c;
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
  std::string method = MethodName(c.method);
  take("method", method);
  c.method = MethodFromName(method);
  take("batch_size", c.batch_size);
  take("learning_rate", c.learning_rate);
  std::string schedule = "cosine_decay";
  take("lr_schedule", schedule);
  if (schedule != "cosine_decay") Fail(ErrorKind::kConfig, "lr_schedule must be cosine_decay");
  take("warmup_fraction", c.warmup_fraction);
  take("epochs", c.epochs);
  take("beta", c.beta);
  take("gamma", c.gamma);
  take("weight_decay", c.weight_decay);
  take("adam_beta1", c.adam_beta1);
  take("adam_beta2", c.adam_beta2);
  take("adam_epsilon", c.adam_epsilon);
  take("plateau_tolerance", c.plateau_tolerance);
  take("early_stop", c.early_stop);
  std::string turns = "all";
  take("bc_turns", turns);
  if (turns != "all" && turns != "agent") Fail(ErrorKind::kConfig, "bc_turns must be all or agent");
  c.bc_turns = turns == "all" ? BcTurns::kAllParties : BcTurns::kAgentOnly;
  take("seed", c.seed);
  take("jobs", c.jobs);
  take("max_steps", c.max_steps);
  take("trace_every", c.trace_every);
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!seen.count(it.key())) Fail(ErrorKind::kConfig, "unknown config field '" + it.key() + "'");
  }
  c.Validate();
  return c;
}

void WriteTraceCsv(const std::string& path, std::span<const TraceRecord> trace, bool append) {
  std::string text;
  if (!append) text = "step,method,loss,grad_norm,gap_segment,gap_first_turn\n";
  char line[256];
  for (const TraceRecord& r : trace) {
    std::snprintf(line, sizeof(line), "%" PRId64 ",%s,%.17g,%.17g,%.17g,%.17g\n", r.step,
                  r.method.c_str(), r.loss, r.grad_norm, r.gap_segment, r.gap_first_turn);
    text += line;
  }
  if (!append) {
    WriteTextFile(path, text);
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) Fail(ErrorKind::kIo, "cannot append to " + path);
  out << text;
  if (!out) Fail(ErrorKind::kIo, "write failed for " + path);
}

std::vector<TraceRecord> ReadTraceCsv(const std::string& path) {
  std::istringstream in(ReadTextFile(path));
  std::string line;
  std::vector<TraceRecord> out;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    std::istringstream ls(line);
    TraceRecord r;
    std::string field;
    std::vector<std::string> f;
    while (std::getline(ls, field, ',')) f.push_back(field);
    if (f.size() != 6) {
      Fail(ErrorKind::kParse, path + ":" + std::to_string(line_no) + ": expected 6 columns");
    }
    try {
      r.step = std::stoll(f[0]);
      r.method = f[1];
      r.loss = std::stod(f[2]);
      r.grad_norm = std::stod(f[3]);
      r.gap_segment = std::stod(f[4]);
      r.gap_first_turn = std::stod(f[5]);
    } catch (const std::exception&) {
      Fail(ErrorKind::kParse, path + ":" + std::to_string(line_no) + ": bad number");
    }
    out.push_back(std::move(r));
  }
  return out;
}

SegmentGaps MeasureGaps(const Policy& policy, std::span<const PreferencePair> pairs) {
  SegmentGaps g;
  if (pairs.empty()) return g;
  std::vector<double> seg(pairs.size()), first(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    const auto pos = pairs[i].positive().steps();
    const auto neg = pairs[i].negative().steps();
    double s = 0.0;
    for (size_t t = 0; t < std::max(pos.size(), neg.size()); ++t) {
      double d = 0.0;
      if (t < pos.size()) d += LogProb(policy, pos[t].history, pos[t].action);
      if (t < neg.size()) d -= LogProb(policy, neg[t].history, neg[t].action);
      if (t == 0) first[i] = d;
      s += d;
    }
    seg[i] = s;
  }
  g.segment = PairwiseSum(seg.data(), seg.size()) / pairs.size();
  g.first_turn = PairwiseSum(first.data(), first.size()) / pairs.size();
  return g;
}

TrainState::TrainState(Policy p)
    : policy(std::move(p)),
      adam_m(Policy::dim(), 0.0),
      adam_v(Policy::dim(), 0.0) {}

nlohmann::json CheckpointToJson(const TrainState& s, const TrainConfig& cfg) {
  nlohmann::json j = PolicyToJson(s.policy);
  nlohmann::json t;
  t["step"] = s.step;
  t["adam_m"] = s.adam_m;
  t["adam_v"] = s.adam_v;
  t["epoch_loss_sum"] = s.epoch_loss_sum;
  t["previous_epoch_loss"] =
      s.previous_epoch_loss ? nlohmann::json(*s.previous_epoch_loss) : nlohmann::json(nullptr);
  t["finished"] = s.finished;
  j["optimizer"] = std::move(t);
  j["train_config"] = ToJson(cfg);
  return j;
}

TrainState CheckpointFromJson(const nlohmann::json& j) {
  TrainState s(PolicyFromJson(j));
  if (!j.contains("optimizer")) return s;
  try {
    const auto& t = j.at("optimizer");
    s.step = t.at("step").get<int64_t>();
    s.adam_m = t.at("adam_m").get<std::vector<double>>();
    s.adam_v = t.at("adam_v").get<std::vector<double>>();
    s.epoch_loss_sum = t.at("epoch_loss_sum").get<double>();
    if (!t.at("previous_epoch_loss").is_null()) {
      s.previous_epoch_loss = t.at("previous_epoch_loss").get<double>();
    }
    s.finished = t.at("finished").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kLoad, std::string("malformed optimizer state: ") + e.what());
  }
  if (static_cast<int>(s.adam_m.size()) != Policy::dim() ||
      static_cast<int>(s.adam_v.size()) != Policy::dim()) {
    Fail(ErrorKind::kLoad, "optimizer state has the wrong dimension");
  }
  return s;
}

void SaveCheckpoint(const std::string& path, const TrainState& state, const TrainConfig& cfg) {
  WriteTextFile(path, CheckpointToJson(state, cfg).dump() + "\n");
}

TrainState LoadCheckpoint(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ReadTextFile(path));
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kLoad, path + ": " + e.what());
  }
  return CheckpointFromJson(j);
}

std::vector<BcExample> BcExamples(std::span<const Session> sessions, BcTurns turns) {
  std::vector<BcExample> out;
  for (const Session& s : sessions) {
    for (Role r : {Role::kFirst, Role::kSecond}) {
      if (turns == BcTurns::kAgentOnly && r != s.agent_role) continue;
      const int n = AgentRoundCount(s, r);
      for (int t = 0; t < n; ++t) {
        History h = HistoryAt(s, t, r);
        DialogueAct a = s.turns[HistoryLength(t, r)].act;
        out.push_back({std::move(h), std::move(a)});
      }
    }
  }
  return out;
}

namespace {

struct Prepared {
  std::vector<BcExample> examples;
  size_t count = 0;
};

Prepared Prepare(const TrainConfig& cfg, const TrainData& data, const ReferencePolicy* ref) {
  Prepared p;
  switch (cfg.method) {
    case Method::kBc:
      if (data.sessions.empty()) Fail(ErrorKind::kArgument, "bc needs a non-empty corpus");
      p.examples = BcExamples(data.sessions, cfg.bc_turns);
      p.count = p.examples.size();
      break;
    case Method::kPreferredSft: {
      if (data.segment_pairs.empty()) {
        Fail(ErrorKind::kArgument, "preferred_sft needs at least one preference pair");
      }
      std::vector<Session> positives;
      for (const auto& pair : data.segment_pairs) positives.push_back(pair.positive().session());
      p.examples = BcExamples(positives, BcTurns::kAgentOnly);
      p.count = p.examples.size();
      break;
    }
    case Method::kDpo:
      if (data.segment_pairs.empty()) Fail(ErrorKind::kArgument, "dpo needs preference pairs");
      for (size_t i = 0; i < data.segment_pairs.size(); ++i) {
        const auto& pair = data.segment_pairs[i];
        if (pair.positive().length() != 1 || pair.negative().length() != 1) {
          Fail(ErrorKind::kArgument,
               "dpo needs single-round pairs (L = 1) but pair " + std::to_string(i) +
                   " has L = " + std::to_string(pair.positive().length()) +
                   "; cut them with reshape-pairs --lengths 1,1");
        }
      }
      p.count = data.segment_pairs.size();
      break;
    case Method::kSdpo:
      if (data.segment_pairs.empty()) Fail(ErrorKind::kArgument, "sdpo needs preference pairs");
      p.count = data.segment_pairs.size();
      break;
    case Method::kEto:
    case Method::kDmpo:
      if (data.session_pairs.empty()) {
        Fail(ErrorKind::kArgument, std::string(MethodName(cfg.method)) +
                                       " needs whole-session pairs (collect-pairs --mode from-scratch)");
      }
      p.count = data.session_pairs.size();
      break;
  }
  if (IsPreferenceMethod(cfg.method) && ref == nullptr) {
    Fail(ErrorKind::kArgument, "preference methods need a reference policy");
  }
  return p;
}

double ItemLossGrad(const TrainConfig& cfg, const TrainData& data, const Prepared& prep,
                    const Policy& policy, const ReferencePolicy* ref, size_t i,
                    std::span<double> grad) {
  const LossConfig lc = cfg.loss();
  auto take = [&](LossValue v) {
    std::copy(v.grad.begin(), v.grad.end(), grad.begin());
    return v.value;
  };
  switch (cfg.method) {
    case Method::kBc:
    case Method::kPreferredSft: {
      const BcExample& ex = prep.examples[i];
      const ActDistribution d = Distribution(policy, ex.history);
      const int k = d.IndexOf(ex.action);
      if (k < 0) Fail(ErrorKind::kArgument, "corpus act is illegal in its history");
      std::fill(grad.begin(), grad.end(), 0.0);
      AccumulateGradLogProb(d, k, -1.0, grad);
      return -d.logprobs[k];
    }
    case Method::kDpo:
      return take(DpoLoss(data.segment_pairs[i], policy, *ref, lc));
    case Method::kSdpo:
      return take(SdpoLoss(data.segment_pairs[i], policy, *ref, lc));
    case Method::kEto:
      return take(EtoLoss(data.session_pairs[i], policy, *ref, lc));
    case Method::kDmpo:
      return take(DmpoLoss(data.session_pairs[i], policy, *ref, lc));
  }
  return 0.0;
}

// Mean loss and gradient of a batch, reduced in a fixed order.
double BatchLossGrad(const TrainConfig& cfg, const TrainData& data, const Prepared& prep,
                     const Policy& policy, const ReferencePolicy* ref,
                     std::span<const size_t> items, std::vector<double>* grad) {
  const size_t n = items.size();
  const int d = Policy::dim();
  std::vector<double> losses(n);
  std::vector<double> grads(grad ? n * d : d);
  ParallelFor(n, cfg.jobs, [&](size_t b) {
    std::vector<double> scratch;
    std::span<double> g;
    if (grad) {
      g = std::span<double>(grads).subspan(b * d, d);
    } else {
      scratch.assign(d, 0.0);
      g = scratch;
    }
    losses[b] = ItemLossGrad(cfg, data, prep, policy, ref, items[b], g);
  });
  if (grad) {
    grad->assign(d, 0.0);
    std::vector<double> column(n);
    for (int k = 0; k < d; ++k) {
      for (size_t b = 0; b < n; ++b) column[b] = grads[b * d + k];
      (*grad)[k] = PairwiseSum(column.data(), n) / n;
    }
  }
  return PairwiseSum(losses.data(), n) / n;
}

std::vector<size_t> EpochOrder(size_t n, uint64_t seed, int epoch) {
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(DeriveSeed(seed, {0xe90c4ULL, static_cast<uint64_t>(epoch)}));
  for (size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.UniformInt(i)]);
  return order;
}

double ScheduledRate(double base, int64_t step, int64_t total, double warmup_fraction) {
  const int64_t warmup = static_cast<int64_t>(std::floor(warmup_fraction * total));
  if (step < warmup) return base * static_cast<double>(step + 1) / warmup;
  const int64_t span = std::max<int64_t>(1, total - warmup);
  const double progress = static_cast<double>(step - warmup) / span;
  return base * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace

double BatchLoss(const TrainConfig& cfg, const TrainData& data, const Policy& policy,
                 const ReferencePolicy* ref, std::span<const size_t> items) {
  const Prepared prep = Prepare(cfg, data, ref);
  return BatchLossGrad(cfg, data, prep, policy, ref, items, nullptr);
}

TrainResult Train(const TrainConfig& cfg, const TrainData& data, const Policy& init,
                  const ReferencePolicy* ref, const TrainState* resume) {
  cfg.Validate();
  const Prepared prep = Prepare(cfg, data, ref);
  TrainResult out{resume ? *resume : TrainState(init), {}, 0, false};
  TrainState& st = out.state;
  const size_t n = prep.count;
  const int64_t per_epoch = static_cast<int64_t>((n + cfg.batch_size - 1) / cfg.batch_size);
  const int64_t total = per_epoch * cfg.epochs;
  const double base_lr = cfg.EffectiveLearningRate();
  const int d = Policy::dim();
  int cached_epoch = -1;
  std::vector<size_t> order;
  std::vector<double> grad;
  out.epochs_completed = static_cast<int>(st.step / std::max<int64_t>(per_epoch, 1));

  while (!st.finished && st.step < total && (cfg.max_steps == 0 || st.step < cfg.max_steps)) {
    const int epoch = static_cast<int>(st.step / per_epoch);
    const int64_t b = st.step % per_epoch;
    if (epoch != cached_epoch) {
      if (ref != nullptr && !ref->Intact()) {
        Fail(ErrorKind::kState, "reference policy changed during training");
      }
      order = EpochOrder(n, cfg.seed, epoch);
      cached_epoch = epoch;
    }
    const size_t lo = static_cast<size_t>(b) * cfg.batch_size;
    const size_t hi = std::min(n, lo + cfg.batch_size);
    const std::span<const size_t> batch(order.data() + lo, hi - lo);

    TraceRecord rec;
    rec.step = st.step;
    rec.method = MethodName(cfg.method);
    if (!data.monitor_pairs.empty() &&
        (st.step % cfg.trace_every == 0 || st.step + 1 == total)) {
      const SegmentGaps g = MeasureGaps(st.policy, data.monitor_pairs);
      rec.gap_segment = g.segment;
      rec.gap_first_turn = g.first_turn;
    }
    rec.loss = BatchLossGrad(cfg, data, prep, st.policy, ref, batch, &grad);
    double sq = 0.0;
    for (double x : grad) sq += x * x;
    rec.grad_norm = std::sqrt(sq);
    if (!std::isfinite(rec.loss) || !std::isfinite(rec.grad_norm)) {
      Fail(ErrorKind::kNumeric, std::string(MethodName(cfg.method)) +
                                    ": non-finite loss or gradient at step " +
                                    std::to_string(st.step));
    }
    if (rec.loss > kDivergedLoss) {
      Fail(ErrorKind::kNumeric, std::string(MethodName(cfg.method)) + ": diverged, loss " +
                                    std::to_string(rec.loss) + " at step " +
                                    std::to_string(st.step));
    }

    const double lr = ScheduledRate(base_lr, st.step, total, cfg.warmup_fraction);
    const double t = static_cast<double>(st.step + 1);
    const double c1 = 1.0 - std::pow(cfg.adam_beta1, t);
    const double c2 = 1.0 - std::pow(cfg.adam_beta2, t);
    std::vector<double>& theta = st.policy.mutable_theta();
    for (int k = 0; k < d; ++k) {
      st.adam_m[k] = cfg.adam_beta1 * st.adam_m[k] + (1.0 - cfg.adam_beta1) * grad[k];
      st.adam_v[k] = cfg.adam_beta2 * st.adam_v[k] + (1.0 - cfg.adam_beta2) * grad[k] * grad[k];
      const double mhat = st.adam_m[k] / c1;
      const double vhat = st.adam_v[k] / c2;
      theta[k] -= lr * (mhat / (std::sqrt(vhat) + cfg.adam_epsilon) + cfg.weight_decay * theta[k]);
    }
    st.policy.CheckFinite();
    st.epoch_loss_sum += rec.loss * static_cast<double>(hi - lo);
    out.trace.push_back(std::move(rec));
    ++st.step;

    if (st.step % per_epoch == 0) {
      const double mean = st.epoch_loss_sum / static_cast<double>(n);
      st.epoch_loss_sum = 0.0;
      ++out.epochs_completed;
      if (cfg.early_stop && st.previous_epoch_loss && st.step < total) {
        const double prev = *st.previous_epoch_loss;
        if (std::abs(mean - prev) < cfg.plateau_tolerance * std::max(std::abs(prev), 1e-12)) {
          st.finished = true;
          out.early_stopped = true;
        }
      }
      st.previous_epoch_loss = mean;
    }
  }
  if (st.step >= total) st.finished = true;
  if (ref != nullptr && !ref->Intact()) {
    Fail(ErrorKind::kState, "reference policy changed during training");
  }
  return out;
}

}  // namespace segdpo
