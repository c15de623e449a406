// Copyright 2026 The csmix Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CSMIX_CLI_H_
#define CSMIX_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace csmix {

inline constexpr const char kToolVersion[] = "1.0.0";

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Runs one subcommand. `args` excludes the program name. Errors are written
// to `err` as a single JSON line; usage errors also print the help text.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

// Hex SHA-256 of a file's bytes.
std::string Sha256File(const std::string& path);

}  // namespace csmix

#endif  // CSMIX_CLI_H_
