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

#ifndef SEGDPO_REMOTE_JUDGE_H_
#define SEGDPO_REMOTE_JUDGE_H_

#include <atomic>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>

#include "json.hpp"
#include "segdpo/pipeline.h"

namespace segdpo {

// Text prompts sent to the remote judge. Exposed for tests and for
// inspecting what the model sees.
std::string RenderTranscript(const Session& session);
std::string LocateErrorPrompt(const Session& negative);
std::string SelectSegmentPrompt(const Session& positive, const Session& negative, int e);

// Pulls the verdict object out of a response body. Accepts either the verdict
// itself ({"turn": 3}) or a chat-completion envelope whose first choice's
// message content holds it, optionally inside a code fence. Throws
// kJudgeFormat.
nlohmann::json ParseVerdict(const std::string& body);

// Judge backed by a chat-completion style HTTP endpoint. Requests carry
// {model, messages, temperature: 0} and a bearer token read from the
// environment variable named in the config.
//
// Transport failures, 429 and 5xx responses are retried with exponential
// backoff; 401/403 raise kAuth at once. When every attempt fails the call
// raises kNetwork, or defers to the programmatic judge if configured.
class RemoteJudge : public Judge {
 public:
  RemoteJudge(std::shared_ptr<const Policy> policy, PipelineConfig cfg);

  std::optional<int> LocateError(const Session& negative, uint64_t seed) override;
  int SelectSegment(const Session& positive, const Session& negative, int agent_round) override;
  // Throws kAuth when the token variable is unset and kConfig for an
  // unusable endpoint.
  void CheckReady() const override;
  std::string name() const override { return "remote"; }

  int requests_sent() const { return requests_; }
  int fallbacks() const { return fallbacks_; }

 private:
  nlohmann::json Ask(const std::string& prompt);

  PipelineConfig cfg_;
  ProgrammaticJudge fallback_;
  std::counting_semaphore<1024> slots_;
  std::atomic<int> requests_{0};
  std::atomic<int> fallbacks_{0};
};

// Picks the judge named in cfg.judge.
std::unique_ptr<Judge> MakeJudge(std::shared_ptr<const Policy> policy, const PipelineConfig& cfg);

}  // namespace segdpo

#endif  // SEGDPO_REMOTE_JUDGE_H_
