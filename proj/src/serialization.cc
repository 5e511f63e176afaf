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

#include "segdpo/serialization.h"

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <utility>

#include "segdpo/error.h"

namespace segdpo {

namespace {

const Json& Field(const Json& j, const char* name) {
  if (!j.is_object()) Fail(ErrorKind::kParse, std::string("expected an object holding '") + name + "'");
  auto it = j.find(name);
  if (it == j.end()) Fail(ErrorKind::kParse, std::string("missing field '") + name + "'");
  return *it;
}

template <typename T>
T Get(const Json& j, const char* name) {
  const Json& v = Field(j, name);
  try {
    return v.get<T>();
  } catch (const Json::exception&) {
    Fail(ErrorKind::kParse, std::string("field '") + name + "' has the wrong type");
  }
}

const char* BackgroundRoleName(Role r) {
  return r == Role::kFirst ? "first_speaker" : "second_speaker";
}

Role BackgroundRoleFromName(const std::string& name) {
  if (name == "first_speaker") return Role::kFirst;
  if (name == "second_speaker") return Role::kSecond;
  Fail(ErrorKind::kParse, "field 'role' must be first_speaker or second_speaker");
}

Json ToJson(const Background& b) {
  Json j;
  j["role"] = BackgroundRoleName(b.role);
  j["pool"] = b.pool;
  j["own_valuations"] = b.valuations;
  j["goal_text"] = b.goal_text;
  j["max_rounds"] = b.max_rounds;
  return j;
}

Background BackgroundFromJson(const Json& j, const std::string& scenario_id) {
  Background b;
  b.scenario_id = scenario_id;
  b.role = BackgroundRoleFromName(Get<std::string>(j, "role"));
  b.pool = Get<std::vector<int>>(j, "pool");
  b.valuations = Get<std::vector<int>>(j, "own_valuations");
  b.goal_text = Get<std::string>(j, "goal_text");
  b.max_rounds = Get<int>(j, "max_rounds");
  return b;
}

// Rethrows a nested failure as a parse error that names the enclosing field.
template <typename Fn>
auto InField(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    Fail(ErrorKind::kParse, std::string(name) + ": " + e.what());
  }
}

}  // namespace

Json ToJson(const DialogueAct& act) {
  Json j;
  j["kind"] = ActKindName(act.kind);
  if (act.kind == ActKind::kOffer) j["claim"] = act.claim;
  return j;
}

DialogueAct DialogueActFromJson(const Json& j) {
  DialogueAct act;
  act.kind = ActKindFromName(Get<std::string>(j, "kind"));
  if (act.kind == ActKind::kOffer) {
    act.claim = Get<std::vector<int>>(j, "claim");
  } else if (j.contains("claim")) {
    Fail(ErrorKind::kParse, "field 'claim' is only valid on offers");
  }
  return act;
}

Json ToJson(const Scores& s) {
  Json j;
  j["goal"] = s.goal();
  j["rel"] = s.relationship();
  return j;
}

Scores ScoresFromJson(const Json& j) {
  const int goal = Get<int>(j, "goal");
  const int rel = Get<int>(j, "rel");
  try {
    return Scores(goal, rel);
  } catch (const Error& e) {
    Fail(ErrorKind::kParse, std::string("scores out of range: ") + e.what());
  }
}

Json ToJson(const Session& s) {
  Json j;
  j["scenario_id"] = s.scenario_id();
  j["first_speaker_background"] = ToJson(s.backgrounds[0]);
  j["second_speaker_background"] = ToJson(s.backgrounds[1]);
  Json turns = Json::array();
  for (const Turn& t : s.turns) {
    Json jt;
    jt["speaker"] = RoleName(t.speaker);
    jt["action"] = ToJson(t.act);
    turns.push_back(std::move(jt));
  }
  j["turns"] = std::move(turns);
  j["scores"] = {{"first", ToJson(s.scores[0])}, {"second", ToJson(s.scores[1])}};
  if (s.deal.has_value()) {
    std::vector<int> second(s.deal->size());
    for (size_t i = 0; i < second.size(); ++i) {
      second[i] = s.backgrounds[0].pool[i] - (*s.deal)[i];
    }
    j["deal"] = {{"first", *s.deal}, {"second", second}};
  } else {
    j["deal"] = nullptr;
  }
  j["agent_role"] = RoleName(s.agent_role);
  j["partner"] = s.partner;
  j["horizon"] = s.horizon;
  j["scorer_version"] = s.scorer_version;
  return j;
}

Session SessionFromJson(const Json& j) {
  Session s;
  const std::string id = Get<std::string>(j, "scenario_id");
  s.backgrounds[0] = InField("first_speaker_background", [&] {
    return BackgroundFromJson(Field(j, "first_speaker_background"), id);
  });
  s.backgrounds[1] = InField("second_speaker_background", [&] {
    return BackgroundFromJson(Field(j, "second_speaker_background"), id);
  });
  const Json& turns = Field(j, "turns");
  if (!turns.is_array()) Fail(ErrorKind::kParse, "field 'turns' must be an array");
  for (size_t i = 0; i < turns.size(); ++i) {
    s.turns.push_back(InField("turns", [&] {
      return Turn{static_cast<int>(i), RoleFromName(Get<std::string>(turns[i], "speaker")),
                  DialogueActFromJson(Field(turns[i], "action"))};
    }));
  }
  const Json& scores = Field(j, "scores");
  s.scores[0] = InField("scores", [&] { return ScoresFromJson(Field(scores, "first")); });
  s.scores[1] = InField("scores", [&] { return ScoresFromJson(Field(scores, "second")); });
  const Json& deal = Field(j, "deal");
  if (!deal.is_null()) {
    s.deal = InField("deal", [&] { return Get<std::vector<int>>(deal, "first"); });
  }
  s.agent_role = RoleFromName(Get<std::string>(j, "agent_role"));
  s.partner = Get<std::string>(j, "partner");
  s.horizon = Get<int>(j, "horizon");
  s.scorer_version = Get<std::string>(j, "scorer_version");
  InField("session", [&] { s.Validate(); });
  return s;
}

Json ToJson(const Scenario& s) {
  Json j;
  j["id"] = s.id;
  j["seed"] = s.seed;
  j["pool"] = s.pool;
  j["valuations_first"] = s.valuations[0];
  j["valuations_second"] = s.valuations[1];
  j["hardness"] = s.hardness;
  j["max_rounds"] = s.max_rounds;
  return j;
}

Scenario ScenarioFromJson(const Json& j) {
  Scenario s = InField("scenario", [&] {
    return MakeScenario(Get<std::string>(j, "id"), Get<std::vector<int>>(j, "pool"),
                        Get<std::vector<int>>(j, "valuations_first"),
                        Get<std::vector<int>>(j, "valuations_second"),
                        Get<int>(j, "max_rounds"), Get<uint64_t>(j, "seed"));
  });
  // Hardness is derived; a stored value that disagrees means the file was
  // edited or produced by an incompatible version.
  const double stored = Get<double>(j, "hardness");
  if (std::abs(stored - s.hardness) > 1e-9) {
    Fail(ErrorKind::kParse, "field 'hardness' does not match the valuations");
  }
  s.hardness = stored;
  return s;
}

Json ToJson(const PreferencePair& p) {
  Json j;
  j["kind"] = "segment";
  j["scenario_id"] = p.scenario_id();
  j["agent_role"] = RoleName(p.perspective());
  j["e"] = p.start();
  j["L"] = p.positive().length();
  if (!p.equal_length()) j["L_negative"] = p.negative().length();
  j["positive_session"] = ToJson(p.positive().session());
  j["negative_session"] = ToJson(p.negative().session());
  j["provenance"] = ProvenanceName(p.provenance());
  j["scores_pos"] = ToJson(p.scores_pos());
  j["scores_neg"] = ToJson(p.scores_neg());
  j["shared_prefix_len"] = p.shared_prefix_len();
  return j;
}

Json ToJson(const SessionPair& p) {
  Json j;
  j["kind"] = "session";
  j["scenario_id"] = p.scenario_id();
  j["agent_role"] = RoleName(p.perspective());
  j["positive_session"] = ToJson(p.positive().session());
  j["negative_session"] = ToJson(p.negative().session());
  j["provenance"] = ProvenanceName(p.provenance());
  j["scores_pos"] = ToJson(p.scores_pos());
  j["scores_neg"] = ToJson(p.scores_neg());
  return j;
}

PairRecord PairFromJson(const Json& j) {
  const std::string kind = Get<std::string>(j, "kind");
  const Role role = RoleFromName(Get<std::string>(j, "agent_role"));
  auto pos = std::make_shared<const Session>(
      InField("positive_session", [&] { return SessionFromJson(Field(j, "positive_session")); }));
  auto neg = std::make_shared<const Session>(
      InField("negative_session", [&] { return SessionFromJson(Field(j, "negative_session")); }));
  const Provenance prov = ProvenanceFromName(Get<std::string>(j, "provenance"));
  if (kind == "session") {
    return InField("pair", [&] { return PairRecord(SessionPair(pos, neg, role, prov)); });
  }
  if (kind != "segment") Fail(ErrorKind::kParse, "field 'kind' must be segment or session");
  const int e = Get<int>(j, "e");
  const int length = Get<int>(j, "L");
  const bool unequal = j.contains("L_negative");
  const int neg_length = unequal ? Get<int>(j, "L_negative") : length;
  return InField("pair", [&] {
    return PairRecord(PreferencePair(ExtractSegment(pos, e, length, role),
                                     ExtractSegment(neg, e, neg_length, role), prov,
                                     unequal));
  });
}

std::string ToJsonLine(const Json& j) { return j.dump(); }

std::vector<Json> ParseJsonl(const std::string& text, const std::string& source) {
  std::vector<Json> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const Json::exception& e) {
      Fail(ErrorKind::kParse, source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<Json> ReadJsonl(const std::filesystem::path& path) {
  return ParseJsonl(ReadTextFile(path), path.string());
}

void WriteJsonl(const std::filesystem::path& path, std::span<const Json> records) {
  std::string text;
  for (const Json& j : records) {
    text += ToJsonLine(j);
    text += '\n';
  }
  WriteTextFile(path, text);
}

namespace {

// Parses each non-blank line with fn, reporting failures as "<path>:<line>: ...".
template <typename T, typename Fn>
std::vector<T> ReadRecords(const std::filesystem::path& path, Fn&& fn) {
  const std::string text = ReadTextFile(path);
  std::vector<T> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(fn(Json::parse(line)));
    } catch (const Json::exception& e) {
      Fail(ErrorKind::kParse, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      Fail(ErrorKind::kParse, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

template <typename T>
void WriteRecords(const std::filesystem::path& path, std::span<const T> items) {
  std::string text;
  for (const T& x : items) {
    text += ToJsonLine(ToJson(x));
    text += '\n';
  }
  WriteTextFile(path, text);
}

}  // namespace

std::vector<Session> ReadSessions(const std::filesystem::path& path) {
  return ReadRecords<Session>(path, SessionFromJson);
}

void WriteSessions(const std::filesystem::path& path, std::span<const Session> sessions) {
  WriteRecords(path, sessions);
}

std::vector<Scenario> ReadScenarios(const std::filesystem::path& path) {
  return ReadRecords<Scenario>(path, ScenarioFromJson);
}

void WriteScenarios(const std::filesystem::path& path,
                    std::span<const Scenario> scenarios) {
  WriteRecords(path, scenarios);
}

std::vector<PairRecord> ReadPairs(const std::filesystem::path& path) {
  return ReadRecords<PairRecord>(path, PairFromJson);
}

std::vector<PreferencePair> ReadPreferencePairs(const std::filesystem::path& path) {
  return ReadRecords<PreferencePair>(path, [](const Json& j) {
    PairRecord r = PairFromJson(j);
    if (!std::holds_alternative<PreferencePair>(r)) {
      Fail(ErrorKind::kParse, "expected a segment pair, found a session pair");
    }
    return std::get<PreferencePair>(std::move(r));
  });
}

std::vector<SessionPair> ReadSessionPairs(const std::filesystem::path& path) {
  return ReadRecords<SessionPair>(path, [](const Json& j) {
    PairRecord r = PairFromJson(j);
    if (!std::holds_alternative<SessionPair>(r)) {
      Fail(ErrorKind::kParse, "expected a session pair, found a segment pair");
    }
    return std::get<SessionPair>(std::move(r));
  });
}

void WritePairs(const std::filesystem::path& path, std::span<const PreferencePair> pairs) {
  WriteRecords(path, pairs);
}

void WritePairs(const std::filesystem::path& path, std::span<const SessionPair> pairs) {
  WriteRecords(path, pairs);
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) Fail(ErrorKind::kIo, "read failed for " + path.string());
  return ss.str();
}

void WriteTextFile(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) Fail(ErrorKind::kIo, "write failed for " + path.string());
}

}  // namespace segdpo
