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

#include "segdpo/losses.h"

#include <cmath>

#include "segdpo/error.h"

namespace segdpo {

void LossConfig::Validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    Fail(ErrorKind::kConfig, "beta must be a positive finite number");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) Fail(ErrorKind::kConfig, "gamma must lie in (0, 1]");
}

double NegLogSigmoid(double z) {
  // softplus(-z)
  return z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double DiscountWeight(int t, int T, double gamma) {
  if (T < 1 || t < 0 || t >= T) {
    Fail(ErrorKind::kArgument, "DiscountWeight needs 0 <= t < T");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) Fail(ErrorKind::kConfig, "gamma must lie in (0, 1]");
  if (gamma == 1.0) return static_cast<double>(T - t) / T;
  const double log_gamma = std::log1p(gamma - 1.0);
  return std::expm1((T - t) * log_gamma) / std::expm1(T * log_gamma);
}

namespace {

// Log-ratios, log-probs and weighted gradient of one side.
struct Side {
  std::vector<double> logratio;
  std::vector<double> logprob;
  double weighted_sum = 0.0;
};

Side Evaluate(const Segment& seg, std::span<const double> weights, const Policy& policy,
              const ReferencePolicy& ref, double grad_scale, std::span<double> grad) {
  Side side;
  const auto steps = seg.steps();
  for (size_t t = 0; t < steps.size(); ++t) {
    const ActDistribution d = Distribution(policy, steps[t].history);
    const int i = d.IndexOf(steps[t].action);
    if (i < 0) {
      Fail(ErrorKind::kArgument, "recorded act " + steps[t].action.ToString() +
                                     " is not legal in its history");
    }
    const double ref_lp = LogProbAt(ref.policy(), d, i);
    const double lr = d.logprobs[i] - ref_lp;
    side.logratio.push_back(lr);
    side.logprob.push_back(d.logprobs[i]);
    side.weighted_sum += weights[t] * lr;
    if (grad_scale != 0.0) AccumulateGradLogProb(d, i, grad_scale * weights[t], grad);
  }
  return side;
}

// d/dtheta of -log sigmoid(z) is -sigmoid(-z) dz/dtheta.
LossValue PairLoss(const Segment& pos, std::span<const double> wpos, const Segment& neg,
                   std::span<const double> wneg, const Policy& policy,
                   const ReferencePolicy& ref, double beta) {
  LossValue out;
  out.grad.assign(Policy::dim(), 0.0);
  std::vector<double> gpos(Policy::dim(), 0.0), gneg(Policy::dim(), 0.0);
  Side w = Evaluate(pos, wpos, policy, ref, 1.0, gpos);
  Side l = Evaluate(neg, wneg, policy, ref, 1.0, gneg);
  out.margin = beta * (w.weighted_sum - l.weighted_sum);
  out.value = NegLogSigmoid(out.margin);
  const double s = -Sigmoid(-out.margin) * beta;
  for (int k = 0; k < Policy::dim(); ++k) out.grad[k] = s * (gpos[k] - gneg[k]);
  out.logratio_pos = std::move(w.logratio);
  out.logratio_neg = std::move(l.logratio);
  out.logprob_pos = std::move(w.logprob);
  out.logprob_neg = std::move(l.logprob);
  return out;
}

std::vector<double> Ones(size_t n) { return std::vector<double>(n, 1.0); }

std::vector<double> Discounts(int T, double gamma) {
  std::vector<double> w(T);
  for (int t = 0; t < T; ++t) w[t] = DiscountWeight(t, T, gamma);
  return w;
}

void RequireNonEmpty(const SessionPair& pair) {
  if (pair.positive().length() < 1 || pair.negative().length() < 1) {
    Fail(ErrorKind::kArgument, "session pair has a session without agent rounds");
  }
}

}  // namespace

LossValue DpoLoss(const PreferencePair& pair, const Policy& policy,
                  const ReferencePolicy& ref, const LossConfig& cfg) {
  cfg.Validate();
  if (pair.positive().length() != 1 || pair.negative().length() != 1) {
    Fail(ErrorKind::kArgument, "DPO needs single-round segments (L = 1), got L = " +
                                   std::to_string(pair.positive().length()));
  }
  if (!(pair.positive().steps()[0].history == pair.negative().steps()[0].history)) {
    Fail(ErrorKind::kArgument, "DPO pair histories differ at the erroneous round");
  }
  return PairLoss(pair.positive(), Ones(1), pair.negative(), Ones(1), policy, ref,
                  cfg.beta);
}

LossValue EtoLoss(const SessionPair& pair, const Policy& policy,
                  const ReferencePolicy& ref, const LossConfig& cfg) {
  cfg.Validate();
  RequireNonEmpty(pair);
  return PairLoss(pair.positive(), Ones(pair.positive().length()), pair.negative(),
                  Ones(pair.negative().length()), policy, ref, cfg.beta);
}

LossValue DmpoLoss(const SessionPair& pair, const Policy& policy,
                   const ReferencePolicy& ref, const LossConfig& cfg) {
  cfg.Validate();
  RequireNonEmpty(pair);
  return PairLoss(pair.positive(), Discounts(pair.positive().length(), cfg.gamma),
                  pair.negative(), Discounts(pair.negative().length(), cfg.gamma),
                  policy, ref, cfg.beta);
}

LossValue SdpoLoss(const PreferencePair& pair, const Policy& policy,
                   const ReferencePolicy& ref, const LossConfig& cfg) {
  cfg.Validate();
  return PairLoss(pair.positive(), Ones(pair.positive().length()), pair.negative(),
                  Ones(pair.negative().length()), policy, ref, cfg.beta);
}

namespace {
double Sum(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s;
}
}  // namespace

double SdpoLossFromLogRatios(std::span<const double> pos, std::span<const double> neg,
                             double beta) {
  // Term-by-term differences, so a common shift cancels exactly when the
  // lengths agree.
  if (pos.size() == neg.size()) {
    double z = 0.0;
    for (size_t t = 0; t < pos.size(); ++t) z += pos[t] - neg[t];
    return NegLogSigmoid(beta * z);
  }
  return NegLogSigmoid(beta * (Sum(pos) - Sum(neg)));
}

double EtoLossFromLogRatios(std::span<const double> pos, std::span<const double> neg,
                            double beta) {
  return NegLogSigmoid(beta * (Sum(pos) - Sum(neg)));
}

double DmpoLossFromLogRatios(std::span<const double> pos, std::span<const double> neg,
                             double beta, double gamma) {
  double z = 0.0;
  const int tw = static_cast<int>(pos.size());
  const int tl = static_cast<int>(neg.size());
  for (int t = 0; t < tw; ++t) z += DiscountWeight(t, tw, gamma) * pos[t];
  for (int t = 0; t < tl; ++t) z -= DiscountWeight(t, tl, gamma) * neg[t];
  return NegLogSigmoid(beta * z);
}

}  // namespace segdpo
