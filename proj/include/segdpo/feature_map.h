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

#ifndef SEGDPO_FEATURE_MAP_H_
#define SEGDPO_FEATURE_MAP_H_

#include <array>
#include <span>
#include <vector>

#include "segdpo/core_types.h"

namespace segdpo {

// f(h, a) = onehot(kind(a)) (x) c(h)  ++  [a is an offer] * g(h, a)
//
// c(h) summarizes the history once; g(h, a) describes a concrete claim.
// Every coordinate lies in [-1, 1].
class FeatureMap {
 public:
  static constexpr const char* kVersion = "negotiation-features-v1";
  static constexpr int kContextDim = 28;
  static constexpr int kOfferDim = 8;
  static constexpr int kDim = kNumActKinds * kContextDim + kOfferDim;

  using Context = std::array<double, kContextDim>;
  using OfferFeatures = std::array<double, kOfferDim>;

  // Everything about the history that offer features need, computed once.
  struct Summary {
    Context context{};
    int pool_value = 0;
    double progress = 0.0;
    // Value to this party of the opponent's standing offer, if one stands.
    bool opponent_standing = false;
    double standing_fraction = 0.0;
    // This party's most recent claim, if any.
    bool has_own_claim = false;
    std::vector<int> own_claim;
    double own_claim_fraction = 0.0;
    // The opponent's most recent claim, if any.
    bool has_opponent_claim = false;
    std::vector<int> opponent_claim;
  };

  static constexpr int dim() { return kDim; }
  static int BlockOffset(ActKind kind) { return static_cast<int>(kind) * kContextDim; }
  static constexpr int OfferOffset() { return kNumActKinds * kContextDim; }

  static Summary Summarize(const History& history);
  static OfferFeatures Offer(const History& history, const Summary& summary,
                             std::span<const int> claim);

  // Dense feature vector for one (history, act).
  static std::vector<double> Dense(const History& history, const DialogueAct& act);
};

}  // namespace segdpo

#endif  // SEGDPO_FEATURE_MAP_H_
