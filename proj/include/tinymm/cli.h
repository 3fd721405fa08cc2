// Copyright 2026 The TinyMM Authors
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


#ifndef TINYMM_CLI_H_
#define TINYMM_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace tinymm {

// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,        // bad flags
  kExitLoad = 2,         // model, weights or assignment could not be loaded
  kExitInfeasible = 3,   // no bit assignment meets the budgets
  kExitCalibration = 4,  // calibration set missing or unusable
  kExitInput = 5,        // inference input missing, unreadable or mis-shaped
};

// Runs one command. `args` excludes the program name. Human-readable output
// goes to `out`, diagnostics to `err`; machine-readable files go to --out.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tinymm

#endif  // TINYMM_CLI_H_
