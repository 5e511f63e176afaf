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

#ifndef SEGDPO_DIALOGUE_ACT_H_
#define SEGDPO_DIALOGUE_ACT_H_

#include <string>
#include <string_view>
#include <vector>

namespace segdpo {

// The two seats of a negotiation. The first speaker owns transcript turn 0.
enum class Role { kFirst = 0, kSecond = 1 };

inline constexpr Role Other(Role r) {
  return r == Role::kFirst ? Role::kSecond : Role::kFirst;
}
inline constexpr int RoleIndex(Role r) { return static_cast<int>(r); }
const char* RoleName(Role r);  // "first" / "second"
Role RoleFromName(std::string_view name);

enum class ActKind { kOffer, kAccept, kInsist, kConcede, kSmallTalk, kThreaten };
inline constexpr int kNumActKinds = 6;

const char* ActKindName(ActKind kind);
ActKind ActKindFromName(std::string_view name);

// One discrete move. An Offer carries the per-item quantities the proposer
// keeps; the rest of the pool goes to the other party if it is accepted.
struct DialogueAct {
  ActKind kind = ActKind::kInsist;
  std::vector<int> claim;

  static DialogueAct Offer(std::vector<int> claim) {
    return DialogueAct{ActKind::kOffer, std::move(claim)};
  }
  static DialogueAct Accept() { return DialogueAct{ActKind::kAccept, {}}; }
  static DialogueAct Insist() { return DialogueAct{ActKind::kInsist, {}}; }
  static DialogueAct Concede() { return DialogueAct{ActKind::kConcede, {}}; }
  static DialogueAct SmallTalk() { return DialogueAct{ActKind::kSmallTalk, {}}; }
  static DialogueAct Threaten() { return DialogueAct{ActKind::kThreaten, {}}; }

  bool operator==(const DialogueAct&) const = default;
  std::string ToString() const;
};

}  // namespace segdpo

#endif  // SEGDPO_DIALOGUE_ACT_H_
