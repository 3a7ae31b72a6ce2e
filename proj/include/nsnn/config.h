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

#ifndef NSNN_CONFIG_H_
#define NSNN_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nsnn/dataset.h"
#include "nsnn/learning.h"
#include "nsnn/neuron.h"
#include "nsnn/perturb.h"
#include "nsnn/stability.h"

namespace nsnn {

inline const std::vector<std::string>& known_tasks() {
  static const std::vector<std::string> tasks{"train",  "eval",       "perturb",
                                              "stability", "coding", "fit_spikes",
                                              "grad_check"};
  return tasks;
}

bool is_known_task(const std::string& task);

// Flat experiment configuration. Every key is optional; unknown keys are
// rejected. See README for the schema.
struct ExperimentConfig {
  std::string task;
  std::uint64_t seed = 0;
  std::filesystem::path out = "nsnn_out";

  // Network.
  std::string model_ref;             // as written in the config
  std::filesystem::path model_file;  // model_ref resolved against the config directory
  std::vector<std::size_t> hidden{64};
  double init_gain = 1.0;
  LifParams lif;
  NoiseModel noise = NoiseModel::gaussian(0.3);
  LossMode loss_mode = LossMode::kPerStepMean;

  // Synthetic task.
  SyntheticTaskSpec dataset;

  // Training.
  LearningRule rule = LearningRule::kNdl;
  OptimizerConfig optimizer;
  std::vector<double> lr_grid;
  std::size_t epochs = 60;
  std::size_t batch_size = 64;
  bool record_timing = false;
  std::size_t eval_passes = 1;

  // Perturbation.
  AttackConfig attack;
  std::vector<double> intensities{0.0};
  bool compare_dsnn = false;

  // Stability.
  StabilitySweepConfig stability;

  // Coding analysis.
  std::size_t n_trials = 8;
  std::size_t coding_samples = 500;
  std::size_t bootstrap = 2000;

  // Spike-train fitting.
  std::size_t fit_neurons = 8;
  std::size_t fit_iters = 300;
  double psp_tau = 2.0;

  // Gradient check on the bundled tiny net (or model_file).
  std::size_t grad_samples = 100000;
  std::size_t grad_steps = 2;
  std::size_t grad_label = 0;
  double grad_threshold = 3.0;

  // Canonical JSON echo (after defaults), used for the config hash.
  std::string canonical_json() const;
  // 16 hex digits of FNV-1a over canonical_json().
  std::string hash() const;
};

// Throws ConfigError on malformed JSON, unknown keys, wrong types, or values
// outside their domain.
ExperimentConfig parse_config(const std::string& text,
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

std::string fnv1a_hex(const std::string& text);

}  // namespace nsnn

#endif  // NSNN_CONFIG_H_
