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

#ifndef SEGDPO_SERIALIZATION_H_
#define SEGDPO_SERIALIZATION_H_

#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "segdpo/core_types.h"
#include "segdpo/negotiation.h"

namespace segdpo {

using Json = nlohmann::json;

// Schema-checked conversions. Every *FromJson throws ErrorKind::kParse with a
// message naming the offending field.
Json ToJson(const DialogueAct& act);
DialogueAct DialogueActFromJson(const Json& j);

Json ToJson(const Scores& s);
Scores ScoresFromJson(const Json& j);

Json ToJson(const Session& s);
Session SessionFromJson(const Json& j);

Json ToJson(const Scenario& s);
Scenario ScenarioFromJson(const Json& j);

Json ToJson(const PreferencePair& p);
Json ToJson(const SessionPair& p);

// pairs.jsonl holds segment-level and session-level records side by side,
// told apart by their "kind" field.
using PairRecord = std::variant<PreferencePair, SessionPair>;
PairRecord PairFromJson(const Json& j);

// One compact JSON document per line. Keys are emitted in sorted order so a
// parse/dump round trip reproduces the line byte for byte.
std::string ToJsonLine(const Json& j);

// Reads a JSONL file; parse errors are reported as "<path>:<line>: ...".
std::vector<Json> ReadJsonl(const std::filesystem::path& path);
std::vector<Json> ParseJsonl(const std::string& text, const std::string& source);
void WriteJsonl(const std::filesystem::path& path, std::span<const Json> records);

std::vector<Session> ReadSessions(const std::filesystem::path& path);
void WriteSessions(const std::filesystem::path& path, std::span<const Session> sessions);

std::vector<Scenario> ReadScenarios(const std::filesystem::path& path);
void WriteScenarios(const std::filesystem::path& path,
                    std::span<const Scenario> scenarios);

std::vector<PairRecord> ReadPairs(const std::filesystem::path& path);
std::vector<PreferencePair> ReadPreferencePairs(const std::filesystem::path& path);
std::vector<SessionPair> ReadSessionPairs(const std::filesystem::path& path);
void WritePairs(const std::filesystem::path& path,
                std::span<const PreferencePair> pairs);
void WritePairs(const std::filesystem::path& path, std::span<const SessionPair> pairs);

// Whole-file helpers with I/O errors mapped to ErrorKind::kIo.
std::string ReadTextFile(const std::filesystem::path& path);
void WriteTextFile(const std::filesystem::path& path, const std::string& text);

}  // namespace segdpo

#endif  // SEGDPO_SERIALIZATION_H_
