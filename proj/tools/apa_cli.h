// tools/apa_cli.h

// Copyright 2026  The apa-toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef APA_TOOLS_APA_CLI_H_
#define APA_TOOLS_APA_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace apa {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitModuleError = 1;
inline constexpr int kExitUsage = 2;

// Runs one invocation; args excludes the program name. Normal output goes
// to `out`, diagnostics to `err`.
int RunCli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace apa

#endif  // APA_TOOLS_APA_CLI_H_
