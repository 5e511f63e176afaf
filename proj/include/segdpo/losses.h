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

#ifndef SEGDPO_LOSSES_H_
#define SEGDPO_LOSSES_H_

#include <span>
#include <vector>

#include "segdpo/core_types.h"
#include "segdpo/policy.h"

namespace segdpo {

struct LossConfig {
  double beta = 0.1;
  // Discount of the session-level occupancy loss; 1 uses the analytic limit.
  double gamma = 0.99;

  // Throws kConfig for beta <= 0 or gamma outside (0, 1].
  void Validate() const;
};

// All four objectives have the form -log sigmoid(z) with
// z = beta * (sum_t w_t D^w_t - sum_t v_t D^l_t) and
// D_t = log pi_theta(y_t|h_t) - log pi_ref(y_t|h_t).
struct LossValue {
  double value = 0.0;
  double margin = 0.0;  // z
  std::vector<double> grad;
  std::vector<double> logratio_pos;  // D^w_t per agent round
  std::vector<double> logratio_neg;  // D^l_t per agent round
  std::vector<double> logprob_pos;   // log pi_theta(y^w_t|h^w_t)
  std::vector<double> logprob_neg;
};

// -log sigmoid(z), computed without overflow.
double NegLogSigmoid(double z);
double Sigmoid(double z);

// (1 - gamma^(T-t)) / (1 - gamma^T), with gamma = 1 mapped to (T-t)/T.
double DiscountWeight(int t, int T, double gamma);

// Single erroneous round. Throws kArgument unless both segments have one
// round with identical histories.
LossValue DpoLoss(const PreferencePair& pair, const Policy& policy,
                  const ReferencePolicy& ref, const LossConfig& cfg);

// Whole sessions, unweighted sums. Throws kArgument for empty sessions.
LossValue EtoLoss(const SessionPair& pair, const Policy& policy,
                  const ReferencePolicy& ref, const LossConfig& cfg);

// Whole sessions, each round weighted by DiscountWeight(t, T, gamma).
LossValue DmpoLoss(const SessionPair& pair, const Policy& policy,
                   const ReferencePolicy& ref, const LossConfig& cfg);

// Equal-length segments starting at the erroneous round. Segments of unequal
// length are only reachable through a pair built with allow_unequal_lengths,
// which is an ablation: the partition function no longer cancels.
LossValue SdpoLoss(const PreferencePair& pair, const Policy& policy,
                   const ReferencePolicy& ref, const LossConfig& cfg);

// Scalar forms over precomputed per-round log-ratios.
double SdpoLossFromLogRatios(std::span<const double> pos, std::span<const double> neg,
                             double beta);
double EtoLossFromLogRatios(std::span<const double> pos, std::span<const double> neg,
                            double beta);
double DmpoLossFromLogRatios(std::span<const double> pos, std::span<const double> neg,
                             double beta, double gamma);

}  // namespace segdpo

#endif  // SEGDPO_LOSSES_H_
