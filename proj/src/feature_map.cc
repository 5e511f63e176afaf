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

#include "segdpo/feature_map.h"

#include <algorithm>

#include "segdpo/negotiation.h"

namespace segdpo {

namespace {

constexpr int kBias = 0;
constexpr int kProgress = 1;
constexpr int kOpponentStanding = 2;
constexpr int kStandingFraction = 3;
constexpr int kStandingTimesProgress = 4;
constexpr int kOpponentConceded = 5;
constexpr int kOwnClaimFraction = 6;
constexpr int kOpponentThreatened = 7;
constexpr int kRoundZero = 8;
constexpr int kRoundOne = 9;
constexpr int kRecentActs = 10;  // 3 slots x kNumActKinds
static_assert(kRecentActs + 3 * kNumActKinds == FeatureMap::kContextDim);

int RemainderValue(const Background& b, std::span<const int> claim) {
  int v = 0;
  for (size_t i = 0; i < b.pool.size(); ++i) v += (b.pool[i] - claim[i]) * b.valuations[i];
  return v;
}

}  // namespace

FeatureMap::Summary FeatureMap::Summarize(const History& h) {
  Summary s;
  const Background& b = h.background;
  const Role self = h.self();
  s.pool_value = b.PoolValue();
  const double total = s.pool_value;
  const int own_round = h.OwnRound();
  s.progress = std::min(1.0, own_round / static_cast<double>(b.max_rounds));

  const std::vector<int>* first_opp = nullptr;
  const std::vector<int>* last_opp = nullptr;
  const std::vector<int>* last_own = nullptr;
  bool threatened = false;
  for (const Turn& t : h.turns) {
    if (t.speaker == self) {
      if (t.act.kind == ActKind::kOffer) last_own = &t.act.claim;
      continue;
    }
    if (t.act.kind == ActKind::kThreaten) threatened = true;
    if (t.act.kind == ActKind::kOffer) {
      if (first_opp == nullptr) first_opp = &t.act.claim;
      last_opp = &t.act.claim;
    }
  }
  auto standing = CurrentStandingOffer(h.turns);
  if (standing && standing->proposer != self) {
    s.opponent_standing = true;
    s.standing_fraction = RemainderValue(b, standing->claim) / total;
  }
  if (last_own != nullptr) {
    s.has_own_claim = true;
    s.own_claim = *last_own;
    s.own_claim_fraction = b.ValueOf(*last_own) / total;
  }
  if (last_opp != nullptr) {
    s.has_opponent_claim = true;
    s.opponent_claim = *last_opp;
  }

  Context& c = s.context;
  c[kBias] = 1.0;
  c[kProgress] = s.progress;
  c[kOpponentStanding] = s.opponent_standing ? 1.0 : 0.0;
  c[kStandingFraction] = s.standing_fraction;
  c[kStandingTimesProgress] = s.standing_fraction * s.progress;
  if (first_opp != nullptr) {
    const int gained = RemainderValue(b, *last_opp) - RemainderValue(b, *first_opp);
    c[kOpponentConceded] = std::max(0, gained) / total;
  }
  c[kOwnClaimFraction] = s.own_claim_fraction;
  c[kOpponentThreatened] = threatened ? 1.0 : 0.0;
  c[kRoundZero] = own_round == 0 ? 1.0 : 0.0;
  c[kRoundOne] = own_round == 1 ? 1.0 : 0.0;
  const int n = static_cast<int>(h.turns.size());
  for (int slot = 0; slot < 3 && slot < n; ++slot) {
    const ActKind k = h.turns[n - 1 - slot].act.kind;
    c[kRecentActs + slot * kNumActKinds + static_cast<int>(k)] = 1.0;
  }
  return s;
}

FeatureMap::OfferFeatures FeatureMap::Offer(const History& h, const Summary& s,
                                            std::span<const int> claim) {
  const Background& b = h.background;
  const double v = b.ValueOf(claim) / static_cast<double>(s.pool_value);
  OfferFeatures g{};
  g[0] = v;
  g[1] = v * v;
  g[2] = v * s.progress;
  g[3] = s.opponent_standing ? v - s.standing_fraction : 0.0;
  g[4] = s.has_own_claim ? v - s.own_claim_fraction : 0.0;
  int left = 0, total_units = 0, wanted = 0, satisfied = 0;
  bool repeat = s.has_own_claim;
  for (size_t i = 0; i < claim.size(); ++i) {
    left += b.pool[i] - claim[i];
    total_units += b.pool[i];
    if (s.has_opponent_claim) {
      wanted += s.opponent_claim[i];
      satisfied += std::min(b.pool[i] - claim[i], s.opponent_claim[i]);
    }
    if (repeat && s.own_claim[i] != claim[i]) repeat = false;
  }
  g[5] = wanted > 0 ? satisfied / static_cast<double>(wanted) : 0.0;
  g[6] = left / static_cast<double>(total_units);
  g[7] = repeat ? 1.0 : 0.0;
  return g;
}

std::vector<double> FeatureMap::Dense(const History& h, const DialogueAct& act) {
  std::vector<double> f(kDim, 0.0);
  const Summary s = Summarize(h);
  std::copy(s.context.begin(), s.context.end(), f.begin() + BlockOffset(act.kind));
  if (act.kind == ActKind::kOffer) {
    const OfferFeatures g = Offer(h, s, act.claim);
    std::copy(g.begin(), g.end(), f.begin() + OfferOffset());
  }
  return f;
}

}  // namespace segdpo
