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

#ifndef SEGDPO_ERROR_H_
#define SEGDPO_ERROR_H_

#include <stdexcept>
#include <string>

namespace segdpo {

enum class ErrorKind {
  kRange,        // index outside the transcript / segment bounds
  kArgument,     // contract violation by the caller
  kParse,        // malformed JSON / JSONL input
  kRule,         // illegal move in the negotiation game
  kState,        // operation not valid in the current game state
  kConfig,       // invalid configuration value
  kDomain,       // math domain problem (log of zero occupancy, ...)
  kIo,           // filesystem failures
  kNumeric,      // NaN / divergence during training
  kLoad,         // checkpoint version mismatch
  kNetwork,      // remote judge transport failure
  kAuth,         // remote judge rejected the credentials
  kJudgeFormat,  // remote judge returned an unparseable verdict
};

const char* ErrorKindName(ErrorKind kind);

// Single exception type for the library; callers switch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace segdpo

#endif  // SEGDPO_ERROR_H_
