/*
 * Copyright 2026 The IOBBA Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef IOBBA_CLI_H_
#define IOBBA_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace iobba {

// Exit statuses of run_cli.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Runs the `iobba` command line. `args` excludes the program name.
//
//   iobba [--seed N] [--out-dir DIR] [--config FILE] <command> [options]
//
// Commands: synth, fit, detect-eval, simulate. Global flags may also follow
// the command name.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace iobba

#endif  // IOBBA_CLI_H_
