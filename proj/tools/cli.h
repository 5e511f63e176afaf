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

#ifndef SEGDPO_TOOLS_CLI_H_
#define SEGDPO_TOOLS_CLI_H_

#include <string>
#include <vector>

namespace segdpo::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;   // anything unclassified
inline constexpr int kExitConfig = 2;    // bad flags or config values
inline constexpr int kExitIo = 3;        // unreadable/unwritable files, malformed input, network
inline constexpr int kExitContract = 4;  // data that does not fit the requested operation

// Runs one segdpo command line; args[0] is the program name.
// args[0] is the program name.
int Run(const std::vector<std::string>& args);

// The built-in run configuration (sections bc, train, pipeline, eval, repro).
std::string DefaultConfigJson();

}  // namespace segdpo::cli

#endif  // SEGDPO_TOOLS_CLI_H_
