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

#include "segdpo/remote_judge.h"

#include <chrono>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "segdpo/error.h"

namespace segdpo {

namespace {

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;
};

Endpoint SplitEndpoint(const std::string& url) {
  const size_t scheme = url.find("://");
  if (scheme == std::string::npos) Fail(ErrorKind::kConfig, "judge endpoint needs a scheme: " + url);
  const std::string s = url.substr(0, scheme);
  if (s != "http" && s != "https") Fail(ErrorKind::kConfig, "unsupported judge scheme: " + s);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (s == "https") Fail(ErrorKind::kConfig, "built without TLS; https judge endpoints need SEGDPO_JUDGE_TLS");
#endif
  const size_t slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

std::string Describe(const Turn& t) {
  const DialogueAct& a = t.act;
  std::ostringstream out;
  switch (a.kind) {
    case ActKind::kOffer: {
      out << "proposes to keep (";
      for (size_t i = 0; i < a.claim.size(); ++i) out << (i ? ", " : "") << a.claim[i];
      out << ") and leave the rest";
      break;
    }
    case ActKind::kAccept: out << "accepts the standing offer"; break;
    case ActKind::kInsist: out << "insists on its position"; break;
    case ActKind::kConcede: out << "signals willingness to give ground"; break;
    case ActKind::kSmallTalk: out << "makes friendly small talk"; break;
    case ActKind::kThreaten: out << "threatens to walk away"; break;
  }
  return out.str();
}

std::string Vector(const std::vector<int>& v) {
  std::string s = "(";
  for (size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s + ")";
}

std::string Outcome(const Session& s) {
  const Role r = s.agent_role;
  std::ostringstream out;
  out << "Outcome for the agent: goal " << s.score(r).goal() << "/10, relationship "
      << s.score(r).relationship() << " (range -5..5).";
  return out.str();
}

}  // namespace

std::string RenderTranscript(const Session& session) {
  const Role agent = session.agent_role;
  const Background& b = session.background(agent);
  std::ostringstream out;
  out << "Items in the pool: " << Vector(b.pool) << "\n";
  out << "Agent's value per item: " << Vector(b.valuations) << "\n";
  out << "The agent is the " << RoleName(agent) << " speaker.\n";
  int round = 0;
  for (const Turn& t : session.turns) {
    if (t.speaker == agent) {
      out << "[agent round " << round++ << "] agent " << Describe(t) << "\n";
    } else {
      out << "    partner " << Describe(t) << "\n";
    }
  }
  out << (session.deal ? "A deal was reached.\n" : "No deal was reached.\n");
  return out.str();
}

std::string LocateErrorPrompt(const Session& negative) {
  std::ostringstream out;
  out << "Below is a negotiation in which the agent did poorly.\n\n"
      << RenderTranscript(negative) << Outcome(negative) << "\n\n"
      << "Find the earliest agent round whose choice decided the poor result and after which "
         "a different choice could still have done better. Answer with JSON only: "
         "{\"turn\": <agent round number>} or {\"turn\": null} if no such round exists.";
  return out.str();
}

std::string SelectSegmentPrompt(const Session& positive, const Session& negative, int e) {
  std::ostringstream out;
  out << "Two versions of a negotiation share everything before agent round " << e
      << ".\n\nImproved version:\n"
      << RenderTranscript(positive) << Outcome(positive) << "\n\nOriginal version:\n"
      << RenderTranscript(negative) << Outcome(negative) << "\n\n"
      << "Starting at agent round " << e
      << ", how many consecutive agent rounds of the improved version account for its better "
         "result? Answer with JSON only: {\"length\": <number of agent rounds>}.";
  return out.str();
}

nlohmann::json ParseVerdict(const std::string& body) {
  auto parse = [](const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) Fail(ErrorKind::kJudgeFormat, "judge reply is not JSON: " + text.substr(0, 200));
    return j;
  };
  nlohmann::json j = parse(body);
  if (j.is_object() && j.contains("choices")) {
    const auto& choices = j["choices"];
    if (!choices.is_array() || choices.empty() || !choices[0].contains("message") ||
        !choices[0]["message"].contains("content") ||
        !choices[0]["message"]["content"].is_string()) {
      Fail(ErrorKind::kJudgeFormat, "chat completion without message content");
    }
    std::string content = choices[0]["message"]["content"].get<std::string>();
    const size_t open = content.find('{');
    const size_t close = content.rfind('}');
    if (open == std::string::npos || close == std::string::npos || close < open) {
      Fail(ErrorKind::kJudgeFormat, "judge content holds no JSON object");
    }
    j = parse(content.substr(open, close - open + 1));
  }
  if (!j.is_object()) Fail(ErrorKind::kJudgeFormat, "judge verdict must be a JSON object");
  return j;
}

RemoteJudge::RemoteJudge(std::shared_ptr<const Policy> policy, PipelineConfig cfg)
    : cfg_(std::move(cfg)),
      fallback_(std::move(policy), cfg_),
      slots_(std::clamp(cfg_.remote.max_concurrency, 1, 1024)) {}

void RemoteJudge::CheckReady() const {
  SplitEndpoint(cfg_.remote.endpoint);
  if (cfg_.remote.model.empty()) Fail(ErrorKind::kConfig, "remote judge needs a model name");
  const std::string& var = cfg_.remote.token_env;
  if (!var.empty() && std::getenv(var.c_str()) == nullptr) {
    Fail(ErrorKind::kAuth, "environment variable " + var + " is not set");
  }
}

nlohmann::json RemoteJudge::Ask(const std::string& prompt) {
  const Endpoint ep = SplitEndpoint(cfg_.remote.endpoint);
  nlohmann::json request = {
      {"model", cfg_.remote.model},
      {"temperature", 0},
      {"messages",
       nlohmann::json::array(
           {{{"role", "system"},
             {"content", "You assess negotiation transcripts and reply with JSON only."}},
            {{"role", "user"}, {"content", prompt}}})}};
  const std::string body = request.dump();
  httplib::Headers headers;
  if (!cfg_.remote.token_env.empty()) {
    if (const char* token = std::getenv(cfg_.remote.token_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
  }
  const auto timeout = std::chrono::duration<double>(cfg_.remote.timeout_seconds);
  double backoff = cfg_.remote.backoff_seconds;
  std::string last_error;
  for (int attempt = 1; attempt <= cfg_.remote.max_attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
      backoff *= 2.0;
    }
    httplib::Client client(ep.base);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    slots_.acquire();
    ++requests_;
    httplib::Result res = client.Post(ep.path, headers, body, "application/json");
    slots_.release();
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    const int status = res->status;
    if (status == 401 || status == 403) {
      Fail(ErrorKind::kAuth, "judge endpoint rejected the credentials (HTTP " +
                                 std::to_string(status) + ")");
    }
    if (status >= 200 && status < 300) return ParseVerdict(res->body);
    last_error = "HTTP " + std::to_string(status);
    if (status != 429 && status < 500) break;
  }
  Fail(ErrorKind::kNetwork, "judge request failed after retries: " + last_error);
}

std::optional<int> RemoteJudge::LocateError(const Session& negative, uint64_t seed) {
  nlohmann::json v;
  try {
    v = Ask(LocateErrorPrompt(negative));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kNetwork || !cfg_.remote.fallback_to_programmatic) throw;
    ++fallbacks_;
    return fallback_.LocateError(negative, seed);
  }
  if (!v.contains("turn")) Fail(ErrorKind::kJudgeFormat, "verdict lacks 'turn'");
  if (v["turn"].is_null()) return std::nullopt;
  if (!v["turn"].is_number_integer()) Fail(ErrorKind::kJudgeFormat, "'turn' must be an integer");
  const int turn = v["turn"].get<int>();
  if (turn < 0 || turn >= AgentRoundCount(negative, negative.agent_role)) {
    Fail(ErrorKind::kJudgeFormat, "'turn' " + std::to_string(turn) + " is not an agent round");
  }
  return turn;
}

int RemoteJudge::SelectSegment(const Session& positive, const Session& negative,
                               int agent_round) {
  const Role role = negative.agent_role;
  const int available = std::min(AgentRoundCount(positive, role),
                                 AgentRoundCount(negative, role)) - agent_round;
  if (available < 1) Fail(ErrorKind::kRange, "no agent rounds left at the erroneous round");
  nlohmann::json v;
  try {
    v = Ask(SelectSegmentPrompt(positive, negative, agent_round));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kNetwork || !cfg_.remote.fallback_to_programmatic) throw;
    ++fallbacks_;
    return fallback_.SelectSegment(positive, negative, agent_round);
  }
  if (!v.contains("length") || !v["length"].is_number_integer()) {
    Fail(ErrorKind::kJudgeFormat, "verdict lacks an integer 'length'");
  }
  const int length = v["length"].get<int>();
  if (length < 1) Fail(ErrorKind::kJudgeFormat, "'length' must be positive");
  return std::min(length, available);
}

std::unique_ptr<Judge> MakeJudge(std::shared_ptr<const Policy> policy, const PipelineConfig& cfg) {
  if (cfg.judge == JudgeKind::kRemote) return std::make_unique<RemoteJudge>(std::move(policy), cfg);
  return std::make_unique<ProgrammaticJudge>(std::move(policy), cfg);
}

}  // namespace segdpo
