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

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nsnn/config.h"
#include "nsnn/run.h"

int main(int argc, char** argv) {
  CLI::App app{"Noisy spiking neural network experiments"};
  std::string task;
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  std::string tasks;
  for (const auto& t : nsnn::known_tasks()) tasks += (tasks.empty() ? "" : ", ") + t;
  app.add_option("task", task, "one of: " + tasks)->required();
  app.add_option("--config", config, "JSON experiment config")->required();
  auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
  auto* out_opt = app.add_option("--out", out, "output directory");
  app.set_version_flag("--version", nsnn::build_id());

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : nsnn::kExitConfig;
  }

  nsnn::RunRequest request;
  request.task = task;
  request.config_path = config;
  if (*seed_opt) request.seed = seed;
  if (*out_opt) request.out = out;
  return nsnn::run(request, std::cerr);
}
