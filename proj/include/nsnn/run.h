// Copyright 2026 The NSNN Authors
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

#ifndef NSNN_RUN_H_
#define NSNN_RUN_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "nsnn/config.h"

namespace nsnn {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,  // other errors and a failed grad_check verdict
  kExitConfig = 2,
  kExitDivergence = 3,
  kExitCapacity = 4,
};

struct RunRequest {
  std::string task;
  std::filesystem::path config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
};

// Loads the config, applies command-line overrides and runs the task.
// Never throws; errors are reported on `log` and mapped to exit codes.
int run(const RunRequest& request, std::ostream& log);

// Runs an already parsed config (task must be set).
int run_config(const ExperimentConfig& config, std::ostream& log);

// Build identifier compiled into the binary (short commit hash or "unknown").
std::string build_id();

}  // namespace nsnn

#endif  // NSNN_RUN_H_
