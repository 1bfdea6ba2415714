// Copyright 2026 The wcfa Authors
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

#ifndef WCFA_CLI_HPP_
#define WCFA_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace wcfa::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUserError = 1;
inline constexpr int kExitNumericError = 2;

/// Environment variable consulted for the default `--seed`.
inline constexpr const char* kSeedEnv = "WCFA_SEED";

/// Runs the `wcfa` command line. Data goes to `out` (or `--out` files),
/// diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wcfa::cli

#endif  // WCFA_CLI_HPP_
