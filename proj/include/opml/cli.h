/*
 * Copyright 2026 The OPML Lab Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef OPML_CLI_H_
#define OPML_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace opml {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;

// Runs one `opml` command: generate | convert | train | eval | gradcheck |
// sweep. args excludes the program name. Normal output goes to `out`,
// diagnostics to `err`. Logging is configured from OPML_LOG on each call.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Reads OPML_LOG (error, info, debug; default error) and points the default
// logger at stderr. Safe to call repeatedly.
void ConfigureLoggingFromEnv();

}  // namespace opml

#endif  // OPML_CLI_H_
