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

#ifndef NSNN_OPTIMIZER_H_
#define NSNN_OPTIMIZER_H_

#include <cstddef>
#include <span>
#include <string>

#include "nsnn/numerics.h"

namespace nsnn {

enum class OptimizerMethod { kSgd, kAdam };

std::string to_string(OptimizerMethod method);
OptimizerMethod optimizer_method_from_string(const std::string& name);

// Cosine annealing: rate(step) = base_rate * 0.5 * (1 + cos(pi * step / total)).
// Steps beyond `total_steps` stay at the endpoint (rate 0).
struct CosineSchedule {
  double base_rate = 1e-3;
  std::size_t total_steps = 1;

  double multiplier(std::size_t step) const;
  double rate(std::size_t step) const { return base_rate * multiplier(step); }
};

struct AdamState {
  Vector m;
  Vector v;
  std::size_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// params -= lr * grads
void sgd_step(std::span<double> params, std::span<const double> grads, double lr);

// One bias-corrected Adam descent step. Moments are sized lazily.
void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, double lr);

// Same update but ascending (params += ...), used by adversarial searches.
void adam_ascent_step(std::span<double> params, std::span<const double> grads,
                      AdamState& state, double lr);

struct OptimizerConfig {
  OptimizerMethod method = OptimizerMethod::kAdam;
  double learning_rate = 3e-3;
  bool cosine = true;
};

// Stateful optimizer over a flat parameter vector.
class Optimizer {
 public:
  Optimizer(const OptimizerConfig& config, std::size_t total_steps);

  double current_rate() const;
  std::size_t steps_taken() const { return step_; }
  void apply(std::span<double> params, std::span<const double> grads);

 private:
  OptimizerConfig config_;
  CosineSchedule schedule_;
  AdamState adam_;
  std::size_t step_ = 0;
};

}  // namespace nsnn

#endif  // NSNN_OPTIMIZER_H_
